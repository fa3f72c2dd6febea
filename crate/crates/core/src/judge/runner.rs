//! Batch judging: render, invoke, parse, filter, vote, and persist.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conditioning::{build_conditioning_set, enumerate_targets, Condition};
use crate::dataset::{Corpus, Dimension, Domain, RubricSet};
use crate::error::{Error, Result};
use crate::judge::backend::{BackendConfig, JudgeBackend};
use crate::judge::parse::parse_prediction;
use crate::judge::prompt::{render_prompt, RenderConfig};

/// One judged (target, seed) cell, as persisted in run artifacts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JudgePrediction {
    pub evaluator_id: String,
    pub idea_id: String,
    pub dimension: Dimension,
    pub condition: Condition,
    pub shots: usize,
    /// The run seed this prediction came from (one prediction per seed).
    pub seed: u64,
    pub score: i64,
    pub reason: String,
    pub confidence: i64,
    pub backend_id: String,
    /// True when confidence fell below the run's threshold.
    pub discarded: bool,
}

/// A target the runner could not judge, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSkip {
    pub evaluator_id: String,
    pub idea_id: String,
    pub reason: String,
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dimension: Dimension,
    pub domain: Domain,
    pub condition: Condition,
    pub shots: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_confidence_threshold")]
    pub confidence_threshold: i64,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub render: RenderConfig,
}

pub fn default_confidence_threshold() -> i64 {
    80
}

/// Partition of predictions by the confidence threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<JudgePrediction>,
    pub discarded: Vec<JudgePrediction>,
    /// |discarded| / |input|; `None` for empty input.
    pub discard_rate: Option<f64>,
}

/// Mark and split predictions below `threshold`. The `discarded` flag on
/// every returned prediction is set accordingly.
pub fn confidence_filter(predictions: Vec<JudgePrediction>, threshold: i64) -> FilterOutcome {
    let total = predictions.len();
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for mut prediction in predictions {
        prediction.discarded = prediction.confidence < threshold;
        if prediction.discarded {
            discarded.push(prediction);
        } else {
            kept.push(prediction);
        }
    }
    let discard_rate = (total > 0).then(|| discarded.len() as f64 / total as f64);
    FilterOutcome {
        kept,
        discarded,
        discard_rate,
    }
}

/// Most frequent score. Ties take the median of the tied scores; an even
/// tie count takes the lower middle. Fully deterministic.
pub fn majority_vote(scores: &[i64]) -> Result<i64> {
    if scores.is_empty() {
        return Err(Error::NoSurvivingPrediction);
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &score in scores {
        *counts.entry(score).or_insert(0) += 1;
    }
    let top = *counts.values().max().expect("non-empty");
    let tied: Vec<i64> = counts
        .iter()
        .filter(|&(_, &count)| count == top)
        .map(|(&score, _)| score)
        .collect();
    Ok(tied[(tied.len() - 1) / 2])
}

/// Output of [`run_condition`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub config: RunConfig,
    /// Final voted score per (evaluator_id, idea_id). Targets whose
    /// predictions were all discarded are absent (missing cells).
    pub finals: BTreeMap<(String, String), i64>,
    /// Every prediction made, kept and discarded alike, sorted by
    /// (evaluator, idea, seed).
    pub predictions: Vec<JudgePrediction>,
    pub skips: Vec<TargetSkip>,
    pub discard_rate: Option<f64>,
}

/// Judge every target in the (dimension, domain) slice under one
/// condition: per seed, build the conditioning set, render, invoke, and
/// parse; then confidence-filter and majority-vote per target.
///
/// Per-target failures (insufficient pools, backend or parse errors) skip
/// the target with a recorded reason. Only configuration errors abort.
pub fn run_condition(
    corpus: &Corpus,
    rubric: &RubricSet,
    config: &RunConfig,
) -> Result<RunOutcome> {
    let backend = config.backend.build()?;
    run_condition_with(corpus, rubric, config, backend.as_ref())
}

/// [`run_condition`] against an already-built backend.
pub fn run_condition_with(
    corpus: &Corpus,
    rubric: &RubricSet,
    config: &RunConfig,
    backend: &dyn JudgeBackend,
) -> Result<RunOutcome> {
    if config.seeds.is_empty() {
        return Err(Error::Config("seeds list must be non-empty".to_string()));
    }
    let spec = rubric.spec(config.dimension);
    let targets = enumerate_targets(corpus, config.dimension, config.domain);

    let mut all_predictions = Vec::new();
    let mut finals = BTreeMap::new();
    let mut skips = Vec::new();
    let mut n_discarded = 0usize;

    'targets: for target in &targets {
        let mut target_predictions = Vec::new();
        for &seed in &config.seeds {
            let conditioning = match build_conditioning_set(
                corpus,
                target,
                config.condition,
                config.shots,
                seed,
            ) {
                Ok(set) => set,
                Err(e) => {
                    skips.push(TargetSkip {
                        evaluator_id: target.evaluator_id.clone(),
                        idea_id: target.idea_id.clone(),
                        reason: e.to_string(),
                    });
                    continue 'targets;
                }
            };
            let bundle = render_prompt(corpus, target, &conditioning, spec, &config.render);
            let parsed = match backend
                .invoke(&bundle)
                .and_then(|raw| parse_prediction(&raw, config.dimension))
            {
                Ok(parsed) => parsed,
                Err(e) => {
                    skips.push(TargetSkip {
                        evaluator_id: target.evaluator_id.clone(),
                        idea_id: target.idea_id.clone(),
                        reason: e.to_string(),
                    });
                    continue 'targets;
                }
            };
            target_predictions.push(JudgePrediction {
                evaluator_id: target.evaluator_id.clone(),
                idea_id: target.idea_id.clone(),
                dimension: config.dimension,
                condition: config.condition,
                shots: conditioning.shots,
                seed,
                score: parsed.score,
                reason: parsed.reason,
                confidence: parsed.confidence,
                backend_id: backend.id().to_string(),
                discarded: false,
            });
        }

        let outcome = confidence_filter(target_predictions, config.confidence_threshold);
        n_discarded += outcome.discarded.len();
        let kept_scores: Vec<i64> = outcome.kept.iter().map(|p| p.score).collect();
        if let Ok(score) = majority_vote(&kept_scores) {
            finals.insert((target.evaluator_id.clone(), target.idea_id.clone()), score);
        }
        all_predictions.extend(outcome.kept);
        all_predictions.extend(outcome.discarded);
    }

    all_predictions.sort_by(|a, b| {
        (&a.evaluator_id, &a.idea_id, a.seed).cmp(&(&b.evaluator_id, &b.idea_id, b.seed))
    });
    let total = all_predictions.len();
    Ok(RunOutcome {
        config: config.clone(),
        finals,
        predictions: all_predictions,
        skips,
        discard_rate: (total > 0).then(|| n_discarded as f64 / total as f64),
    })
}

/// Header line of a run artifact: the full config plus skip records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub config: RunConfig,
    pub skips: Vec<TargetSkip>,
    pub n_predictions: usize,
}

impl RunOutcome {
    /// Persist as line-delimited JSON: one header line, then one line per
    /// prediction. Contains no timestamps; identical runs produce
    /// byte-identical files.
    pub fn write_artifact(&self, path: &Path) -> Result<()> {
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        let header = ArtifactHeader {
            config: self.config.clone(),
            skips: self.skips.clone(),
            n_predictions: self.predictions.len(),
        };
        writeln!(
            file,
            "{}",
            serde_json::to_string(&header).map_err(|e| Error::parse(path, 1, e.to_string()))?
        )
        .map_err(|e| Error::io(path, e))?;
        for prediction in &self.predictions {
            writeln!(
                file,
                "{}",
                serde_json::to_string(prediction).map_err(|e| Error::parse(
                    path,
                    0,
                    e.to_string()
                ))?
            )
            .map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// A run artifact read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact {
    pub header: ArtifactHeader,
    pub predictions: Vec<JudgePrediction>,
}

impl RunArtifact {
    pub fn read(path: &Path) -> Result<RunArtifact> {
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let header: ArtifactHeader = match lines.next() {
            Some((_, Ok(line))) => {
                serde_json::from_str(&line).map_err(|e| Error::parse(path, 1, e.to_string()))?
            }
            Some((_, Err(e))) => return Err(Error::io(path, e)),
            None => return Err(Error::parse(path, 1, "empty artifact")),
        };
        let mut predictions = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            predictions.push(
                serde_json::from_str(&line)
                    .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?,
            );
        }
        Ok(RunArtifact {
            header,
            predictions,
        })
    }

    /// Recompute final scores from the persisted predictions using the
    /// artifact's own threshold.
    pub fn finals(&self) -> BTreeMap<(String, String), i64> {
        let mut by_target: BTreeMap<(String, String), Vec<i64>> = BTreeMap::new();
        for prediction in &self.predictions {
            if !prediction.discarded {
                by_target
                    .entry((prediction.evaluator_id.clone(), prediction.idea_id.clone()))
                    .or_default()
                    .push(prediction.score);
            }
        }
        by_target
            .into_iter()
            .filter_map(|(key, scores)| majority_vote(&scores).ok().map(|s| (key, s)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{grid_corpus, tiny_corpus};
    use crate::judge::backend::MockKnnBackend;
    use crate::judge::prompt::PromptBundle;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn mock_run_config(condition: Condition, shots: usize, seeds: Vec<u64>) -> RunConfig {
        RunConfig {
            dimension: Dimension::Specificity,
            domain: Domain::Nlp,
            condition,
            shots,
            seeds,
            confidence_threshold: 80,
            backend: BackendConfig::MockKnn,
            render: RenderConfig::default(),
        }
    }

    fn prediction(score: i64, confidence: i64) -> JudgePrediction {
        JudgePrediction {
            evaluator_id: "E".into(),
            idea_id: "I".into(),
            dimension: Dimension::Specificity,
            condition: Condition::ZeroShot,
            shots: 0,
            seed: 0,
            score,
            reason: String::new(),
            confidence,
            backend_id: "mock_knn".into(),
            discarded: false,
        }
    }

    #[test]
    fn filter_partitions_by_threshold() {
        let preds = vec![prediction(3, 85), prediction(2, 90), prediction(4, 79)];
        let outcome = confidence_filter(preds, 80);
        assert_eq!(outcome.kept.len(), 2);
        assert_eq!(outcome.discarded.len(), 1);
        assert_eq!(outcome.discard_rate, Some(1.0 / 3.0));
        assert!(outcome.discarded[0].discarded);
        assert!(outcome.kept.iter().all(|p| !p.discarded));
    }

    #[test]
    fn filter_rate_is_zero_when_all_pass_and_none_when_empty() {
        let preds = vec![prediction(3, 80), prediction(2, 100)];
        assert_eq!(confidence_filter(preds, 80).discard_rate, Some(0.0));
        assert_eq!(confidence_filter(vec![], 80).discard_rate, None);
    }

    #[test]
    fn majority_vote_follows_the_tie_rules() {
        assert_eq!(majority_vote(&[3, 3, 2]).unwrap(), 3);
        assert_eq!(majority_vote(&[2, 3, 4]).unwrap(), 3);
        assert_eq!(majority_vote(&[2, 3]).unwrap(), 2);
        assert_eq!(majority_vote(&[4, 2, 4, 2]).unwrap(), 2);
        assert_eq!(majority_vote(&[5]).unwrap(), 5);
        assert!(matches!(
            majority_vote(&[]),
            Err(Error::NoSurvivingPrediction)
        ));
    }

    #[test]
    fn four_targets_three_seeds_make_twelve_predictions() {
        // tiny_corpus has exactly 4 specificity records in the NLP slice.
        let corpus = tiny_corpus();
        let rubric = RubricSet::builtin();
        let config = mock_run_config(Condition::ZeroShot, 0, vec![1, 2, 3]);
        let outcome = run_condition(&corpus, &rubric, &config).unwrap();
        assert_eq!(outcome.predictions.len(), 12);
        assert_eq!(outcome.finals.len(), 4);
        assert!(outcome.skips.is_empty());
        assert_eq!(outcome.discard_rate, Some(0.0));
    }

    #[test]
    fn insufficient_pools_skip_targets_with_reasons() {
        // tiny_corpus personalized pools have at most 1 eligible record.
        let corpus = tiny_corpus();
        let rubric = RubricSet::builtin();
        let config = mock_run_config(Condition::Personalized, 5, vec![1]);
        let outcome = run_condition(&corpus, &rubric, &config).unwrap();
        assert!(outcome.finals.is_empty());
        assert_eq!(outcome.skips.len(), 4);
        assert!(outcome.skips[0]
            .reason
            .contains("insufficient conditioning pool"));
    }

    #[test]
    fn artifact_round_trips_and_is_byte_identical_across_reruns() {
        let corpus = grid_corpus(3, 4, 3);
        let rubric = RubricSet::builtin();
        let config = mock_run_config(Condition::Personalized, 3, vec![1, 2, 3]);
        let dir = tempfile::tempdir().unwrap();

        let first_path = dir.path().join("run1.jsonl");
        let second_path = dir.path().join("run2.jsonl");
        run_condition(&corpus, &rubric, &config)
            .unwrap()
            .write_artifact(&first_path)
            .unwrap();
        run_condition(&corpus, &rubric, &config)
            .unwrap()
            .write_artifact(&second_path)
            .unwrap();
        let first = std::fs::read(&first_path).unwrap();
        let second = std::fs::read(&second_path).unwrap();
        assert!(!first.is_empty());
        assert_eq!(first, second);

        let artifact = RunArtifact::read(&first_path).unwrap();
        assert_eq!(artifact.header.config, config);
        assert_eq!(artifact.header.n_predictions, artifact.predictions.len());
        assert_eq!(artifact.predictions.len(), 36 * 3);
        let outcome = run_condition(&corpus, &rubric, &config).unwrap();
        assert_eq!(artifact.finals(), outcome.finals);
        assert_eq!(artifact.header.skips, outcome.skips);
    }

    #[test]
    fn missing_artifact_is_reported_as_such() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("absent.jsonl");
        assert!(matches!(
            RunArtifact::read(&path),
            Err(Error::MissingArtifact(_))
        ));
    }

    #[test]
    fn empty_seed_list_is_a_config_error() {
        let corpus = tiny_corpus();
        let rubric = RubricSet::builtin();
        let config = mock_run_config(Condition::ZeroShot, 0, vec![]);
        assert!(matches!(
            run_condition(&corpus, &rubric, &config),
            Err(Error::Config(_))
        ));
    }

    struct CountingBackend {
        inner: MockKnnBackend,
        calls: AtomicUsize,
    }

    impl JudgeBackend for CountingBackend {
        fn id(&self) -> &str {
            self.inner.id()
        }

        fn invoke(&self, bundle: &PromptBundle) -> crate::error::Result<String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.inner.invoke(bundle)
        }
    }

    #[test]
    fn personalized_and_aggregate_invoke_the_backend_equally_often() {
        let corpus = grid_corpus(3, 4, 3);
        let rubric = RubricSet::builtin();
        let mut counts = Vec::new();
        for condition in [Condition::Personalized, Condition::Aggregate] {
            let backend = CountingBackend {
                inner: MockKnnBackend,
                calls: AtomicUsize::new(0),
            };
            let config = mock_run_config(condition, 4, vec![1, 2, 3]);
            let outcome = run_condition_with(&corpus, &rubric, &config, &backend).unwrap();
            assert!(outcome.skips.is_empty());
            counts.push(backend.calls.load(Ordering::SeqCst));
        }
        assert_eq!(counts[0], counts[1]);
        assert_eq!(counts[0], 36 * 3);
    }

    #[test]
    fn all_predictions_in_artifacts_satisfy_type_invariants() {
        let corpus = grid_corpus(3, 4, 3);
        let rubric = RubricSet::builtin();
        let config = mock_run_config(Condition::Aggregate, 2, vec![1, 2, 3]);
        let outcome = run_condition(&corpus, &rubric, &config).unwrap();
        let (min, max) = config.dimension.scale();
        for p in &outcome.predictions {
            assert!(p.score >= min && p.score <= max);
            assert!((0..=100).contains(&p.confidence));
            assert_eq!(p.discarded, p.confidence < config.confidence_threshold);
            assert_eq!(p.shots, 2);
            assert_eq!(p.backend_id, "mock_knn");
        }
    }
}
