//! Reasoning-similarity study: does pairwise expert agreement predict how
//! similar the judge's reasoning sounds when conditioned on each of the two
//! experts?
//!
//! For every evaluator pair sharing annotated instances, x is the pair's
//! two-rater α over the shared instances and y is the cosine between the
//! pair's aggregated judge-reason embeddings on those instances. The study
//! reports the (x, y) points and their Pearson correlation.

use std::collections::BTreeMap;

use crate::agreement::{
    cosine_similarity, krippendorff_alpha, pearson_r, DistanceMetric, RatingMatrix,
};
use crate::analysis::embedding::{mean_embedding, EmbeddingBackend};
use crate::analysis::report::ReportTable;
use crate::dataset::Corpus;
use crate::error::{Error, Result};
use crate::judge::{JudgePrediction, RunConfig};

/// One evaluator pair's (agreement, reasoning-similarity) point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningPoint {
    pub left: String,
    pub right: String,
    /// Pairwise α over the instances both evaluators annotated.
    pub alpha: f64,
    /// Cosine between the two mean judge-reason embeddings.
    pub cosine: f64,
    pub n_shared_instances: usize,
}

/// A pair that could not produce a point, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPair {
    pub left: String,
    pub right: String,
    pub why: String,
}

/// Scatter data and correlation for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningStudy {
    pub config: RunConfig,
    pub points: Vec<ReasoningPoint>,
    pub skipped: Vec<SkippedPair>,
    /// `None` when the scatter is degenerate (zero variance in either
    /// coordinate), which no correlation can summarize.
    pub pearson_r: Option<f64>,
    pub embedding_id: String,
}

/// Build the study from one run's predictions. Only predictions that
/// survived confidence filtering contribute reason texts, matching what the
/// vote actually used. Requires at least two qualifying pairs.
pub fn reasoning_similarity_study(
    corpus: &Corpus,
    config: &RunConfig,
    predictions: &[JudgePrediction],
    embedding: &dyn EmbeddingBackend,
) -> Result<ReasoningStudy> {
    let dimension = config.dimension;
    let domain = config.domain;

    // evaluator -> idea -> reason texts, in stable order.
    let mut reasons: BTreeMap<&str, BTreeMap<&str, Vec<&str>>> = BTreeMap::new();
    for prediction in predictions {
        if prediction.discarded {
            continue;
        }
        reasons
            .entry(&prediction.evaluator_id)
            .or_default()
            .entry(&prediction.idea_id)
            .or_default()
            .push(&prediction.reason);
    }

    let evaluators = corpus.evaluators_in_slice(dimension, domain);
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (i, left) in evaluators.iter().enumerate() {
        let left_scores = corpus.score_map(left, dimension, Some(domain));
        for right in &evaluators[i + 1..] {
            let right_scores = corpus.score_map(right, dimension, Some(domain));
            let shared: Vec<&String> = left_scores
                .keys()
                .filter(|idea| right_scores.contains_key(*idea))
                .collect();
            let mut skip = |why: String| {
                skipped.push(SkippedPair {
                    left: left.clone(),
                    right: right.clone(),
                    why,
                });
            };
            if shared.is_empty() {
                skip("no shared annotated instances".to_string());
                continue;
            }

            let pairs: Vec<(Option<i64>, Option<i64>)> = shared
                .iter()
                .map(|idea| (Some(left_scores[*idea]), Some(right_scores[*idea])))
                .collect();
            let matrix =
                RatingMatrix::from_two_raters(left, right, &pairs, dimension.value_domain())
                    .expect("corpus scores lie on the dimension scale");
            let alpha = match krippendorff_alpha(&matrix, DistanceMetric::Ordinal) {
                Ok(report) => report.alpha,
                Err(Error::InsufficientPairableData) => None,
                Err(e) => unreachable!("two-rater matrix cannot fail alpha: {e}"),
            };
            let Some(alpha) = alpha else {
                skip("pairwise alpha undefined over shared instances".to_string());
                continue;
            };

            let texts_for = |evaluator: &str| -> Vec<&str> {
                let by_idea = reasons.get(evaluator);
                shared
                    .iter()
                    .flat_map(|idea| {
                        by_idea
                            .and_then(|m| m.get(idea.as_str()))
                            .map(|v| v.as_slice())
                            .unwrap_or(&[])
                            .iter()
                            .copied()
                    })
                    .collect()
            };
            let left_mean = mean_embedding(embedding, &texts_for(left))?;
            let right_mean = mean_embedding(embedding, &texts_for(right))?;
            let (Some(left_mean), Some(right_mean)) = (left_mean, right_mean) else {
                skip("no judge reasons on shared instances".to_string());
                continue;
            };
            let cosine = match cosine_similarity(&left_mean, &right_mean) {
                Ok(c) => c,
                Err(Error::ZeroVector) => {
                    skip("mean reason embedding is the zero vector".to_string());
                    continue;
                }
                Err(e) => return Err(e),
            };

            points.push(ReasoningPoint {
                left: left.clone(),
                right: right.clone(),
                alpha,
                cosine,
                n_shared_instances: shared.len(),
            });
        }
    }

    if points.len() < 2 {
        return Err(Error::NoQualifyingPairs {
            found: points.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.alpha).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.cosine).collect();
    let pearson_r = match pearson_r(&xs, &ys) {
        Ok(r) => Some(r),
        Err(Error::DegenerateSeries(_)) => None,
        Err(e) => return Err(e),
    };

    Ok(ReasoningStudy {
        config: config.clone(),
        points,
        skipped,
        pearson_r,
        embedding_id: embedding.id(),
    })
}

fn annotate(table: &mut ReportTable, studies: &[ReasoningStudy]) {
    // How multiple reason texts collapse into one vector is this pipeline's
    // choice, so it is recorded with the data.
    table.note("reason_aggregation", "mean_of_embeddings");
    table.note(
        "reason_source",
        "predictions that survived confidence filtering",
    );
    if let Some(study) = studies.first() {
        table.note("embedding", study.embedding_id.clone());
    }
}

/// One row per study: the correlation headline.
pub fn reasoning_summary_table(studies: &[ReasoningStudy]) -> ReportTable {
    let mut table = ReportTable::new(
        "reasoning_similarity_summary",
        &[
            "dimension",
            "domain",
            "condition",
            "shots",
            "pearson_r",
            "n_pairs",
            "n_skipped_pairs",
        ],
    );
    annotate(&mut table, studies);
    for study in studies {
        table.push_row(vec![
            study.config.dimension.as_str().into(),
            study.config.domain.as_str().into(),
            study.config.condition.as_str().into(),
            study.config.shots.into(),
            study.pearson_r.into(),
            study.points.len().into(),
            study.skipped.len().into(),
        ]);
    }
    table
}

/// Scatter points across all studies, plot-ready.
pub fn reasoning_points_table(studies: &[ReasoningStudy]) -> ReportTable {
    let mut table = ReportTable::new(
        "reasoning_similarity_points",
        &[
            "condition",
            "shots",
            "left",
            "right",
            "alpha",
            "cosine",
            "n_shared_instances",
        ],
    );
    annotate(&mut table, studies);
    for study in studies {
        for point in &study.points {
            table.push_row(vec![
                study.config.condition.as_str().into(),
                study.config.shots.into(),
                point.left.as_str().into(),
                point.right.as_str().into(),
                point.alpha.into(),
                point.cosine.into(),
                point.n_shared_instances.into(),
            ]);
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::embedding::HashEmbedding;
    use crate::conditioning::Condition;
    use crate::dataset::{Background, Dimension, Domain, Evaluator, Idea, Patent, ScoreRecord};
    use crate::judge::BackendConfig;
    use crate::judge::RenderConfig;

    fn run_config() -> RunConfig {
        RunConfig {
            dimension: Dimension::Specificity,
            domain: Domain::Nlp,
            condition: Condition::Personalized,
            shots: 1,
            seeds: vec![1],
            confidence_threshold: 80,
            backend: BackendConfig::default(),
            render: RenderConfig::default(),
        }
    }

    /// Three evaluators scoring the same 4 ideas on specificity.
    fn hand_corpus(score_rows: &[(&str, [i64; 4])]) -> Corpus {
        let patents = vec![Patent {
            patent_id: "P1".into(),
            domain: Domain::Nlp,
            title: "t".into(),
            abstract_text: "a".into(),
            claims: vec!["c".into()],
            description: String::new(),
        }];
        let idea_ids = ["I1", "I2", "I3", "I4"];
        let ideas: Vec<Idea> = idea_ids
            .iter()
            .map(|id| Idea {
                idea_id: (*id).into(),
                patent_id: "P1".into(),
                system_id: "s".into(),
                title: format!("idea {id}"),
                description: "d".into(),
                implementation: "i".into(),
                differentiation: "f".into(),
            })
            .collect();
        let evaluators: Vec<Evaluator> = score_rows
            .iter()
            .map(|(id, _)| Evaluator {
                evaluator_id: (*id).into(),
                domain: Domain::Nlp,
                background: Background::Technical,
            })
            .collect();
        let mut scores = Vec::new();
        for (evaluator, row) in score_rows {
            for (idea, score) in idea_ids.iter().zip(row) {
                scores.push(ScoreRecord {
                    evaluator_id: (*evaluator).into(),
                    idea_id: (*idea).into(),
                    dimension: Dimension::Specificity,
                    score: *score,
                    reason: None,
                });
            }
        }
        Corpus::from_parts(patents, ideas, evaluators, scores).unwrap()
    }

    fn prediction(evaluator: &str, idea: &str, reason: &str) -> JudgePrediction {
        JudgePrediction {
            evaluator_id: evaluator.into(),
            idea_id: idea.into(),
            dimension: Dimension::Specificity,
            condition: Condition::Personalized,
            shots: 1,
            seed: 1,
            score: 3,
            reason: reason.into(),
            confidence: 95,
            backend_id: "mock_knn".into(),
            discarded: false,
        }
    }

    #[test]
    fn identical_pair_lands_at_one_one() {
        // A and B agree perfectly; C disagrees, creating enough pairs for r.
        let corpus = hand_corpus(&[
            ("A", [1, 2, 3, 4]),
            ("B", [1, 2, 3, 4]),
            ("C", [4, 3, 1, 2]),
        ]);
        let mut predictions = Vec::new();
        for evaluator in ["A", "B", "C"] {
            for idea in ["I1", "I2", "I3", "I4"] {
                let reason = if evaluator == "C" {
                    format!("contrarian take on {idea}")
                } else {
                    format!("shared view of {idea}")
                };
                predictions.push(prediction(evaluator, idea, &reason));
            }
        }
        let study = reasoning_similarity_study(
            &corpus,
            &run_config(),
            &predictions,
            &HashEmbedding::default(),
        )
        .unwrap();
        let ab = study
            .points
            .iter()
            .find(|p| p.left == "A" && p.right == "B")
            .unwrap();
        approx::assert_relative_eq!(ab.alpha, 1.0);
        approx::assert_relative_eq!(ab.cosine, 1.0, epsilon = 1e-12);
        assert_eq!(ab.n_shared_instances, 4);
    }

    #[test]
    fn disjoint_reason_vocabularies_score_near_zero_cosine() {
        let corpus = hand_corpus(&[
            ("A", [1, 2, 3, 4]),
            ("B", [2, 1, 4, 3]),
            ("C", [4, 3, 2, 1]),
        ]);
        let vocab = [
            ("A", "aardvark bison caribou dingo"),
            ("B", "quasar nebula pulsar magnetar"),
            ("C", "sonata quartet aria fugue"),
        ];
        let mut predictions = Vec::new();
        for (evaluator, words) in vocab {
            for idea in ["I1", "I2", "I3", "I4"] {
                predictions.push(prediction(evaluator, idea, words));
            }
        }
        let study = reasoning_similarity_study(
            &corpus,
            &run_config(),
            &predictions,
            &HashEmbedding::new(4096),
        )
        .unwrap();
        for point in &study.points {
            assert!(point.cosine.abs() < 0.1, "{point:?}");
        }
    }

    #[test]
    fn discarded_predictions_contribute_no_reasons() {
        let corpus = hand_corpus(&[("A", [1, 2, 3, 4]), ("B", [1, 2, 4, 3])]);
        let mut predictions = Vec::new();
        for idea in ["I1", "I2", "I3", "I4"] {
            predictions.push(prediction("A", idea, "kept view"));
            let mut dropped = prediction("B", idea, "dropped view");
            dropped.discarded = true;
            predictions.push(dropped);
        }
        let err = reasoning_similarity_study(
            &corpus,
            &run_config(),
            &predictions,
            &HashEmbedding::default(),
        )
        .unwrap_err();
        // B has no surviving reasons, so the only pair is skipped and the
        // study falls below two qualifying pairs.
        assert!(matches!(err, Error::NoQualifyingPairs { found: 0 }));
    }

    #[test]
    fn too_few_pairs_is_an_error() {
        let corpus = hand_corpus(&[("A", [1, 2, 3, 4]), ("B", [2, 1, 4, 3])]);
        let mut predictions = Vec::new();
        for evaluator in ["A", "B"] {
            for idea in ["I1", "I2", "I3", "I4"] {
                predictions.push(prediction(evaluator, idea, "some reason"));
            }
        }
        let err = reasoning_similarity_study(
            &corpus,
            &run_config(),
            &predictions,
            &HashEmbedding::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoQualifyingPairs { found: 1 }));
    }

    #[test]
    fn summary_table_flags_the_aggregation_decision() {
        let corpus = hand_corpus(&[
            ("A", [1, 2, 3, 4]),
            ("B", [2, 1, 4, 3]),
            ("C", [4, 3, 2, 1]),
        ]);
        // A and B share reasoning vocabulary; C does not, so the cosines
        // (and hence the scatter) carry variance.
        let vocab = [
            ("A", "precise mechanism clearly scoped"),
            ("B", "precise mechanism loosely scoped"),
            ("C", "speculative moonshot territory"),
        ];
        let mut predictions = Vec::new();
        for (evaluator, words) in vocab {
            for idea in ["I1", "I2", "I3", "I4"] {
                predictions.push(prediction(evaluator, idea, words));
            }
        }
        let studies = vec![reasoning_similarity_study(
            &corpus,
            &run_config(),
            &predictions,
            &HashEmbedding::default(),
        )
        .unwrap()];
        assert!(studies[0].pearson_r.is_some());
        let summary = reasoning_summary_table(&studies);
        assert_eq!(
            summary
                .metadata
                .get("reason_aggregation")
                .map(String::as_str),
            Some("mean_of_embeddings")
        );
        let points = reasoning_points_table(&studies);
        assert_eq!(points.rows.len(), 3);
    }
}
