//! Difficult-benchmark construction: top-B selection, subset metrics,
//! budget sweeps, per-domain breakdowns and score histograms.

mod histogram;
mod metrics;
mod select;

pub use histogram::{score_histogram, Bin, HistogramView, HistogramViewKind};
pub use metrics::{avg_score, pct_perfect, PerfectRule};
pub use select::{
    budget_sweep, default_budgets, domain_breakdown, select_top, Budget, LanguageMetrics, SelectedSegment,
    SelectionResult, SelectionScope, SweepPoint,
};
