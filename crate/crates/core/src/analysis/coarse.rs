//! Coarse judge-vs-expert agreement: above-median Jaccard and top-half
//! overlap between each expert's selections and the judge's own, over the
//! items both scored.

use std::collections::{BTreeMap, BTreeSet};

use crate::agreement::{above_median_set, jaccard_similarity, top_half_overlap, MedianStrictness};
use crate::analysis::report::ReportTable;
use crate::dataset::{Corpus, Dimension, Domain};
use crate::judge::RunArtifact;

/// Coarse agreement between one expert and the judge conditioned for them.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatorCoarse {
    pub evaluator_id: String,
    /// Ideas with both an expert score and a judge final.
    pub n_shared: usize,
    /// Jaccard of the two above-median sets restricted to shared items;
    /// `None` when there are no shared items.
    pub above_median_jaccard: Option<f64>,
    /// Fraction of the expert's top half the judge also ranks top half;
    /// `None` below two shared items.
    pub top_half: Option<f64>,
}

/// Per-evaluator coarse metrics and their means.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseMetrics {
    pub per_evaluator: Vec<EvaluatorCoarse>,
    pub mean_jaccard: Option<f64>,
    pub mean_top_half: Option<f64>,
}

/// Compare each evaluator's selections against the judge finals conditioned
/// for them. Selections are computed over each side's own scored items,
/// then restricted to the shared ones, mirroring the expert-pair rule.
pub fn coarse_metrics(
    corpus: &Corpus,
    dimension: Dimension,
    domain: Domain,
    finals: &BTreeMap<(String, String), i64>,
    strictness: MedianStrictness,
) -> CoarseMetrics {
    let mut per_evaluator = Vec::new();
    for evaluator in corpus.evaluators_in_slice(dimension, domain) {
        let expert: BTreeMap<String, i64> = corpus.score_map(&evaluator, dimension, Some(domain));
        let judge: BTreeMap<String, i64> = finals
            .iter()
            .filter(|((e, _), _)| *e == evaluator)
            .map(|((_, idea), &score)| (idea.clone(), score))
            .collect();
        let shared: BTreeSet<String> = expert
            .keys()
            .filter(|idea| judge.contains_key(*idea))
            .cloned()
            .collect();

        let above_median_jaccard = (!shared.is_empty()).then(|| {
            let expert_set: BTreeSet<String> = above_median_set(&evaluator, &expert, strictness)
                .items
                .intersection(&shared)
                .cloned()
                .collect();
            let judge_set: BTreeSet<String> = above_median_set("judge", &judge, strictness)
                .items
                .intersection(&shared)
                .cloned()
                .collect();
            jaccard_similarity(&expert_set, &judge_set)
        });
        let top_half = top_half_overlap(&expert, &judge).ok();

        per_evaluator.push(EvaluatorCoarse {
            evaluator_id: evaluator,
            n_shared: shared.len(),
            above_median_jaccard,
            top_half,
        });
    }

    let mean = |values: Vec<f64>| {
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };
    let mean_jaccard = mean(
        per_evaluator
            .iter()
            .filter_map(|e| e.above_median_jaccard)
            .collect(),
    );
    let mean_top_half = mean(per_evaluator.iter().filter_map(|e| e.top_half).collect());
    CoarseMetrics {
        per_evaluator,
        mean_jaccard,
        mean_top_half,
    }
}

/// One summary row per run artifact.
pub fn coarse_judge_report(
    corpus: &Corpus,
    artifacts: &[RunArtifact],
    strictness: MedianStrictness,
) -> ReportTable {
    let mut table = ReportTable::new(
        "coarse_judge_agreement",
        &[
            "dimension",
            "domain",
            "condition",
            "shots",
            "mean_above_median_jaccard",
            "mean_top_half_overlap",
            "n_evaluators",
            "n_jaccard_evaluators",
            "n_top_half_evaluators",
        ],
    );
    table.note(
        "rule",
        "per evaluator over items scored by both expert and judge; means over evaluators with defined values",
    );
    for artifact in artifacts {
        let config = &artifact.header.config;
        let metrics = coarse_metrics(
            corpus,
            config.dimension,
            config.domain,
            &artifact.finals(),
            strictness,
        );
        table.push_row(vec![
            config.dimension.as_str().into(),
            config.domain.as_str().into(),
            config.condition.as_str().into(),
            config.shots.into(),
            metrics.mean_jaccard.into(),
            metrics.mean_top_half.into(),
            metrics.per_evaluator.len().into(),
            metrics
                .per_evaluator
                .iter()
                .filter(|e| e.above_median_jaccard.is_some())
                .count()
                .into(),
            metrics
                .per_evaluator
                .iter()
                .filter(|e| e.top_half.is_some())
                .count()
                .into(),
        ]);
    }
    table
}
