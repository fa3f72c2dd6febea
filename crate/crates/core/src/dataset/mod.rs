//! Data model: patents, generated ideas, evaluators, and per-dimension
//! scores, plus the rubric and the staged screening rules they follow.

mod corpus;
mod dimension;
mod screening;
mod types;

pub use corpus::{Corpus, CorpusPaths, CoverageRow};
pub use dimension::{Dimension, DimensionSpec, RubricSet};
pub use screening::{validate_screening, GateFailure, Violation};
pub use types::{Background, Domain, Evaluator, Idea, Patent, ScoreRecord};

#[cfg(test)]
#[allow(unused_imports)]
pub(crate) use corpus::{grid_corpus, tiny_corpus};
