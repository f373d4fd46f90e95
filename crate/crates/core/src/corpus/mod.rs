//! Data model for annotated test sets and auxiliary resources, with loaders.

mod embeddings;
mod lexicon;
mod parses;
mod scores;
mod testset;
pub(crate) mod tsv;

pub use embeddings::{load_embeddings, EmbeddingTable};
pub use lexicon::{load_frequency_lexicon, FrequencyLexicon};
pub use parses::{load_parses, read_parses, DependencyTree, ParseTable};
pub use scores::{load_scores, read_scores, Orientation, ScoreKey, ScoreMap, ScoreTable, WILDCARD};
pub use testset::{
    load_testset, load_testset_with, read_testset, LangPair, LoadOptions, Protocol, SourceSegment, TestSet,
    TestSetBuilder, TestSetFormat, Translation,
};
