//! Rank correlation machinery: Kendall τ_b, Pearson r, the Difficulty
//! Estimation Correlation (DEC), translator agreement and per-system alignment.

mod agreement;
mod dec;
mod kendall;
mod pearson;

pub use agreement::{agreement_matrix, per_system_alignment, SystemAlignment};
pub use dec::{dec, CellResult, CorrelationReport, Grouping, SkipPolicy, SkipReason, SkippedCell};
pub use kendall::{kendall_tau_b, TauResult};
pub use pearson::pearson;

pub(crate) use dec::{aggregate, cell_tau, gold_cells, hyp_for, GoldCell};
