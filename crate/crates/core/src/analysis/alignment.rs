//! Judge-vs-expert alignment: α between the judge's final scores and the
//! experts they were conditioned for, swept over conditions and shot counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agreement::{krippendorff_alpha, DistanceMetric, RatingMatrix};
use crate::analysis::report::ReportTable;
use crate::conditioning::Condition;
use crate::dataset::{Corpus, Dimension, Domain, RubricSet};
use crate::error::{Error, Result};
use crate::judge::{
    default_confidence_threshold, majority_vote, run_condition_with, BackendConfig, RenderConfig,
    RunArtifact, RunConfig, RunOutcome,
};

/// Alignment of one evaluator with the judge conditioned for them.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatorAlignment {
    pub evaluator_id: String,
    /// Two-rater α over the evaluator's scored ideas; `None` when undefined
    /// or when too few ideas carry both an expert score and a judge final.
    pub alpha: Option<f64>,
    /// Ideas with both an expert score and a judge final.
    pub n_shared: usize,
}

/// One point of the alignment curve.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentPoint {
    pub dimension: Dimension,
    pub domain: Domain,
    pub condition: Condition,
    pub shots: usize,
    pub per_evaluator: Vec<EvaluatorAlignment>,
    /// Mean of the defined per-evaluator α values.
    pub mean_alpha: Option<f64>,
    /// α of one judge column (majority vote across per-evaluator finals)
    /// against all experts at once.
    pub pooled_alpha: Option<f64>,
    pub n_targets: usize,
    pub n_skipped_targets: usize,
    pub discard_rate: Option<f64>,
}

/// Two-rater α between one expert and the judge finals conditioned for
/// them, over the ideas the expert scored in the slice.
pub fn judge_expert_alpha(
    corpus: &Corpus,
    dimension: Dimension,
    domain: Domain,
    evaluator_id: &str,
    finals: &BTreeMap<(String, String), i64>,
    metric: DistanceMetric,
) -> EvaluatorAlignment {
    let expert = corpus.score_map(evaluator_id, dimension, Some(domain));
    let pairs: Vec<(Option<i64>, Option<i64>)> = expert
        .iter()
        .map(|(idea, &score)| {
            let judged = finals
                .get(&(evaluator_id.to_string(), idea.clone()))
                .copied();
            (Some(score), judged)
        })
        .collect();
    let n_shared = pairs.iter().filter(|(_, j)| j.is_some()).count();
    let matrix = RatingMatrix::from_two_raters("expert", "judge", &pairs, dimension.value_domain())
        .expect("corpus scores and voted finals lie on the dimension scale");
    let alpha = match krippendorff_alpha(&matrix, metric) {
        Ok(report) => report.alpha,
        Err(Error::InsufficientPairableData) => None,
        Err(e) => unreachable!("two-rater matrix cannot fail alpha: {e}"),
    };
    EvaluatorAlignment {
        evaluator_id: evaluator_id.to_string(),
        alpha,
        n_shared,
    }
}

/// α of a single judge rater against every expert at once. The judge's
/// value for an idea is the majority vote over its per-evaluator finals.
pub fn pooled_alignment_alpha(
    corpus: &Corpus,
    dimension: Dimension,
    domain: Domain,
    finals: &BTreeMap<(String, String), i64>,
    metric: DistanceMetric,
) -> Option<f64> {
    let evaluators = corpus.evaluators_in_slice(dimension, domain);
    let mut units = std::collections::BTreeSet::new();
    let mut cells = Vec::new();
    let mut judge_scores: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    for evaluator in &evaluators {
        for (idea, score) in corpus.score_map(evaluator, dimension, Some(domain)) {
            units.insert(idea.clone());
            cells.push((idea, evaluator.clone(), score));
        }
    }
    for ((_, idea), &score) in finals {
        if units.contains(idea) {
            judge_scores.entry(idea.clone()).or_default().push(score);
        }
    }
    for (idea, scores) in judge_scores {
        let voted = majority_vote(&scores).expect("non-empty by construction");
        cells.push((idea, "judge".to_string(), voted));
    }
    let mut raters = evaluators;
    raters.push("judge".to_string());
    let matrix = RatingMatrix::new(
        units.into_iter().collect(),
        raters,
        cells,
        dimension.value_domain(),
    )
    .expect("corpus scores and voted finals lie on the dimension scale");
    match krippendorff_alpha(&matrix, metric) {
        Ok(report) => report.alpha,
        Err(Error::InsufficientPairableData) => None,
        Err(e) => unreachable!("pooled matrix cannot fail alpha: {e}"),
    }
}

fn point_from_parts(
    corpus: &Corpus,
    config: &RunConfig,
    finals: &BTreeMap<(String, String), i64>,
    n_skipped_targets: usize,
    discard_rate: Option<f64>,
    metric: DistanceMetric,
) -> AlignmentPoint {
    let dimension = config.dimension;
    let domain = config.domain;
    let per_evaluator: Vec<EvaluatorAlignment> = corpus
        .evaluators_in_slice(dimension, domain)
        .iter()
        .map(|e| judge_expert_alpha(corpus, dimension, domain, e, finals, metric))
        .collect();
    let defined: Vec<f64> = per_evaluator.iter().filter_map(|a| a.alpha).collect();
    let mean_alpha =
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    let n_targets = corpus
        .scores()
        .iter()
        .filter(|s| s.dimension == dimension && corpus.idea_domain(&s.idea_id) == Some(domain))
        .count();
    AlignmentPoint {
        dimension,
        domain,
        condition: config.condition,
        shots: config.shots,
        mean_alpha,
        pooled_alpha: pooled_alignment_alpha(corpus, dimension, domain, finals, metric),
        per_evaluator,
        n_targets,
        n_skipped_targets,
        discard_rate,
    }
}

/// Summarize one finished run as a curve point.
pub fn alignment_point(
    corpus: &Corpus,
    outcome: &RunOutcome,
    metric: DistanceMetric,
) -> AlignmentPoint {
    point_from_parts(
        corpus,
        &outcome.config,
        &outcome.finals,
        outcome.skips.len(),
        outcome.discard_rate,
        metric,
    )
}

/// Summarize a persisted run artifact as a curve point.
pub fn alignment_point_from_artifact(
    corpus: &Corpus,
    artifact: &RunArtifact,
    metric: DistanceMetric,
) -> AlignmentPoint {
    let n = artifact.predictions.len();
    let discarded = artifact.predictions.iter().filter(|p| p.discarded).count();
    let discard_rate = (n > 0).then(|| discarded as f64 / n as f64);
    point_from_parts(
        corpus,
        &artifact.header.config,
        &artifact.finals(),
        artifact.header.skips.len(),
        discard_rate,
        metric,
    )
}

/// Sweep settings for [`alignment_study`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentStudyConfig {
    pub dimensions: Vec<Dimension>,
    pub domains: Vec<Domain>,
    pub conditions: Vec<Condition>,
    /// Shot counts for the few-shot conditions; zero-shot always runs at 0.
    pub shot_list: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_confidence_threshold")]
    pub confidence_threshold: i64,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub render: RenderConfig,
    #[serde(default)]
    pub metric: DistanceMetric,
}

/// Run the judge once per (dimension, domain, condition, shots) and compute
/// every curve point. Skipped targets reduce coverage but are counted,
/// never hidden.
pub fn alignment_study(
    corpus: &Corpus,
    rubric: &RubricSet,
    config: &AlignmentStudyConfig,
) -> Result<Vec<AlignmentPoint>> {
    let few_shot = config.conditions.iter().any(|c| *c != Condition::ZeroShot);
    if few_shot && config.shot_list.is_empty() {
        return Err(Error::Config(
            "shot list must be non-empty for few-shot conditions".to_string(),
        ));
    }
    if config.dimensions.is_empty() || config.domains.is_empty() {
        return Err(Error::Config(
            "alignment study needs at least one dimension and one domain".to_string(),
        ));
    }
    let backend = config.backend.build()?;
    let mut points = Vec::new();
    for &dimension in &config.dimensions {
        for &domain in &config.domains {
            for &condition in &config.conditions {
                let shot_counts: Vec<usize> = if condition == Condition::ZeroShot {
                    vec![0]
                } else {
                    config.shot_list.clone()
                };
                for shots in shot_counts {
                    let run = RunConfig {
                        dimension,
                        domain,
                        condition,
                        shots,
                        seeds: config.seeds.clone(),
                        confidence_threshold: config.confidence_threshold,
                        backend: config.backend.clone(),
                        render: config.render.clone(),
                    };
                    let outcome = run_condition_with(corpus, rubric, &run, backend.as_ref())?;
                    points.push(alignment_point(corpus, &outcome, config.metric));
                }
            }
        }
    }
    Ok(points)
}

/// Machine-readable curve: shots on the x-axis, one row per point.
pub fn alignment_curve_table(points: &[AlignmentPoint], metric: DistanceMetric) -> ReportTable {
    let mut table = ReportTable::new(
        "alignment_curve",
        &[
            "dimension",
            "domain",
            "condition",
            "shots",
            "mean_evaluator_alpha",
            "pooled_alpha",
            "n_evaluators",
            "n_evaluators_defined",
            "n_targets",
            "n_skipped_targets",
            "discard_rate",
        ],
    );
    table.note("metric", metric.as_str());
    table.note(
        "mean_evaluator_alpha",
        "mean over evaluators of two-rater alpha, expert vs judge conditioned for that evaluator",
    );
    table.note(
        "pooled_alpha",
        "one judge rater (majority vote of per-evaluator finals) against all experts",
    );
    for point in points {
        let defined = point
            .per_evaluator
            .iter()
            .filter(|a| a.alpha.is_some())
            .count();
        table.push_row(vec![
            point.dimension.as_str().into(),
            point.domain.as_str().into(),
            point.condition.as_str().into(),
            point.shots.into(),
            point.mean_alpha.into(),
            point.pooled_alpha.into(),
            point.per_evaluator.len().into(),
            defined.into(),
            point.n_targets.into(),
            point.n_skipped_targets.into(),
            point.discard_rate.into(),
        ]);
    }
    table
}
