//! Staged screening: downstream dimensions may only carry a score when
//! their gate dimensions cleared the configured thresholds.
//!
//! Protocol order is specificity first, then technical validity. A
//! downstream score whose gate failed, or whose gate score is missing
//! entirely, is a violation. Each offending `(evaluator, idea, dimension)`
//! triple yields exactly one violation naming the first failed gate.

use std::fmt;

use serde::Serialize;

use crate::dataset::{Corpus, Dimension};

/// Why a downstream score should not exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateFailure {
    /// The gate dimension was scored at or below its threshold.
    GateNotCleared,
    /// The gate dimension was never scored for this evaluator and idea.
    GateMissing,
}

impl fmt::Display for GateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateFailure::GateNotCleared => write!(f, "gate not cleared"),
            GateFailure::GateMissing => write!(f, "gate score missing"),
        }
    }
}

/// A downstream score present despite a failed or missing gate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub evaluator_id: String,
    pub idea_id: String,
    /// The downstream dimension that should have been skipped.
    pub dimension: Dimension,
    /// First gate (in protocol order) that failed.
    pub gate: Dimension,
    /// Threshold the gate had to exceed.
    pub threshold: i64,
    /// The gate's score, if one exists.
    pub gate_score: Option<i64>,
    pub failure: GateFailure,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gate_score {
            Some(gs) => write!(
                f,
                "{} scored {} on idea {}, but {} = {} does not exceed {}",
                self.evaluator_id, self.dimension, self.idea_id, self.gate, gs, self.threshold
            ),
            None => write!(
                f,
                "{} scored {} on idea {}, but {} was never scored",
                self.evaluator_id, self.dimension, self.idea_id, self.gate
            ),
        }
    }
}

/// Check every score in the corpus against the staged screening rules.
/// Returns violations sorted by `(evaluator_id, idea_id, dimension)`.
pub fn validate_screening(corpus: &Corpus) -> Vec<Violation> {
    let mut violations = Vec::new();
    for record in corpus.scores() {
        let gates = record.dimension.gates();
        if gates.is_empty() {
            continue;
        }
        for &(gate, threshold) in gates {
            let gate_score = corpus.score(&record.evaluator_id, &record.idea_id, gate);
            let failure = match gate_score {
                None => GateFailure::GateMissing,
                Some(gs) if gs <= threshold => GateFailure::GateNotCleared,
                Some(_) => continue,
            };
            violations.push(Violation {
                evaluator_id: record.evaluator_id.clone(),
                idea_id: record.idea_id.clone(),
                dimension: record.dimension,
                gate,
                threshold,
                gate_score,
                failure,
            });
            break;
        }
    }
    violations.sort_by(|a, b| {
        (&a.evaluator_id, &a.idea_id, a.dimension).cmp(&(&b.evaluator_id, &b.idea_id, b.dimension))
    });
    violations
}
