//! Conditioning-set construction: for each target (evaluator, idea,
//! dimension) instance, assemble the solved examples shown to the judge
//! under one of three conditions, with seeded reproducible sampling.
//!
//! Leakage rules, enforced here and property-tested:
//! examples share the target's dimension and domain; no example is grounded
//! in the target's patent; personalized sets contain only the target
//! evaluator's own records (never the target item itself); aggregate sets
//! contain only other evaluators' records; sampling is without replacement.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{Corpus, Dimension, ScoreRecord};
use crate::error::{Error, Result};

/// What scoring history the judge sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// No examples at all.
    ZeroShot,
    /// Examples drawn from every evaluator except the target's.
    Aggregate,
    /// Examples drawn from the target evaluator's own history.
    Personalized,
}

impl Condition {
    pub const ALL: [Condition; 3] = [
        Condition::ZeroShot,
        Condition::Aggregate,
        Condition::Personalized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::ZeroShot => "zero_shot",
            Condition::Aggregate => "aggregate",
            Condition::Personalized => "personalized",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Condition> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown condition {s:?}")))
    }
}

/// One instance the judge must score: a human-scored triple, with the
/// grounding patent resolved from the idea.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TargetInstance {
    pub evaluator_id: String,
    pub idea_id: String,
    pub dimension: Dimension,
    pub patent_id: String,
}

/// A solved example shown to the judge. The dimension is the enclosing
/// set's dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub evaluator_id: String,
    pub idea_id: String,
    pub patent_id: String,
    pub score: i64,
}

/// The examples handed to the prompt renderer, in sampled order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditioningSet {
    pub condition: Condition,
    /// Number of examples. Always 0 for `zero_shot`.
    pub shots: usize,
    /// The derived seed that drove the sample, recorded for replay.
    pub seed: u64,
    pub examples: Vec<Example>,
}

/// One target per human score record in the `(dimension, domain)` slice,
/// sorted by (evaluator, idea).
pub fn enumerate_targets(
    corpus: &Corpus,
    dimension: Dimension,
    domain: crate::dataset::Domain,
) -> Vec<TargetInstance> {
    let mut targets: Vec<TargetInstance> = corpus
        .scores()
        .iter()
        .filter(|record| {
            record.dimension == dimension && corpus.idea_domain(&record.idea_id) == Some(domain)
        })
        .map(|record| TargetInstance {
            evaluator_id: record.evaluator_id.clone(),
            idea_id: record.idea_id.clone(),
            dimension,
            patent_id: corpus
                .idea(&record.idea_id)
                .expect("validated corpus")
                .patent_id
                .clone(),
        })
        .collect();
    targets.sort();
    targets
}

/// Records eligible as examples for `target` under `condition`: same
/// domain and dimension, never grounded in the target patent, evaluator
/// filtered per the condition. Sorted by record key. Zero-shot pools are
/// empty by definition.
pub fn candidate_pool(
    corpus: &Corpus,
    target: &TargetInstance,
    condition: Condition,
) -> Vec<ScoreRecord> {
    if condition == Condition::ZeroShot {
        return Vec::new();
    }
    let domain = corpus.idea_domain(&target.idea_id);
    let mut pool: Vec<ScoreRecord> = corpus
        .scores()
        .iter()
        .filter(|record| {
            record.dimension == target.dimension
                && corpus.idea_domain(&record.idea_id) == domain
                && corpus.idea(&record.idea_id).map(|i| i.patent_id.as_str())
                    != Some(target.patent_id.as_str())
                && match condition {
                    Condition::ZeroShot => false,
                    Condition::Personalized => record.evaluator_id == target.evaluator_id,
                    Condition::Aggregate => record.evaluator_id != target.evaluator_id,
                }
        })
        .cloned()
        .collect();
    pool.sort_by(|a, b| a.key().cmp(&b.key()));
    pool
}

/// Seeded sample of `shots` records without replacement (partial
/// Fisher-Yates over the sorted pool). Identical (pool, shots, seed) input
/// yields identical output on every platform.
pub fn sample_set(pool: &[ScoreRecord], shots: usize, seed: u64) -> Result<Vec<ScoreRecord>> {
    if pool.len() < shots {
        return Err(Error::InsufficientPool {
            requested: shots,
            available: pool.len(),
            shortfall: shots - pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    for i in 0..shots {
        let j = rng.gen_range(i as u64..indices.len() as u64) as usize;
        indices.swap(i, j);
    }
    Ok(indices[..shots].iter().map(|&i| pool[i].clone()).collect())
}

/// Stable per-target seed: the first eight little-endian bytes of the
/// SHA-256 of the run seed and the full target coordinates.
pub fn derive_seed(
    run_seed: u64,
    target: &TargetInstance,
    condition: Condition,
    shots: usize,
) -> u64 {
    let text = format!(
        "{run_seed}|{}|{}|{}|{condition}|{shots}",
        target.evaluator_id, target.idea_id, target.dimension
    );
    let digest = Sha256::digest(text.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Assemble the conditioning set for one target: build the pool, derive the
/// seed, sample, and resolve each record's grounding patent.
pub fn build_conditioning_set(
    corpus: &Corpus,
    target: &TargetInstance,
    condition: Condition,
    shots: usize,
    run_seed: u64,
) -> Result<ConditioningSet> {
    let shots = if condition == Condition::ZeroShot {
        0
    } else {
        shots
    };
    let seed = derive_seed(run_seed, target, condition, shots);
    let pool = candidate_pool(corpus, target, condition);
    let sampled = sample_set(&pool, shots, seed)?;
    let examples = sampled
        .into_iter()
        .map(|record| Example {
            patent_id: corpus
                .idea(&record.idea_id)
                .expect("validated corpus")
                .patent_id
                .clone(),
            evaluator_id: record.evaluator_id,
            idea_id: record.idea_id,
            score: record.score,
        })
        .collect();
    Ok(ConditioningSet {
        condition,
        shots,
        seed,
        examples,
    })
}
