//! Translation difficulty estimation toolkit.
//!
//! The crate covers four steps:
//!
//! * ingesting annotated test sets and auxiliary resources ([`corpus`]),
//! * producing per-segment difficulty estimates ([`estimators`]),
//! * meta-evaluating estimators with the Difficulty Estimation Correlation
//!   ([`rank_stats`], [`significance`]),
//! * building difficult benchmarks by subset selection and probing the
//!   estimators for known pitfalls ([`benchmark`], [`analysis`]).
//!
//! Every estimate is stored in *quality-like* orientation: a higher value
//! means the source text is expected to be easier to translate.
//!
//! ```
//! use mtdiff::corpus::{LangPair, Protocol, TestSetBuilder};
//! use mtdiff::estimators::oracle::{oracle, OracleLevel};
//! use mtdiff::rank_stats::{dec, Grouping, SkipPolicy};
//!
//! let mut b = TestSetBuilder::new();
//! for (seg, text) in [("s1", "Hello there."), ("s2", "Good morning to you all.")] {
//!     b.add_segment(seg, "doc", "en", text, "news", None).unwrap();
//! }
//! let pair = LangPair::new("en", "de");
//! b.add_translation("s1", &pair, "sysA", "Hallo.", Some(90.0), Some(Protocol::Esa), false).unwrap();
//! b.add_translation("s2", &pair, "sysA", "Guten Morgen.", Some(70.0), Some(Protocol::Esa), false).unwrap();
//! let testset = b.build().unwrap();
//!
//! let estimate = oracle(&testset, OracleLevel::Full).unwrap();
//! let report = dec(&estimate, &testset, Grouping::BySystem, SkipPolicy::Skip).unwrap();
//! assert_eq!(report.dec, Some(1.0));
//! ```

pub mod analysis;
pub mod benchmark;
pub mod corpus;
pub mod error;
pub mod estimators;
pub mod numeric;
pub mod rank_stats;
pub mod significance;
pub mod synthetic;
pub mod text_metrics;
pub mod tokenize;

pub use error::{Error, Result};
