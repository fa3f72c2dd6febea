//! Pluralistic judging of patent-grounded product ideas.
//!
//! The crate models a corpus of patents, machine-generated product ideas,
//! human evaluators, and their per-dimension Likert scores; measures how
//! much evaluators agree (Krippendorff's α, above-median Jaccard, top-half
//! overlap); conditions an automated judge on individual evaluators' prior
//! scores; runs and parses that judge; synthesizes evaluator cohorts with
//! controllable disagreement; and assembles the comparison reports.

pub mod agreement;
pub mod analysis;
pub mod conditioning;
pub mod dataset;
pub mod error;
pub mod judge;
pub mod synth;

pub use error::{Error, Result};
