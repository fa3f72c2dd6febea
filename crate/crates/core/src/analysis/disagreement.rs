//! Expert disagreement summary: fine-grained α next to coarse above-median
//! agreement, per dimension and domain.

use serde::{Deserialize, Serialize};

use crate::agreement::{
    above_median_set, krippendorff_alpha, pairwise_jaccard, DistanceMetric, MedianStrictness,
    OwnerSelections,
};
use crate::analysis::report::ReportTable;
use crate::dataset::{Corpus, Dimension, Domain};
use crate::error::Error;

/// Default minimum shared scored items for a pair to enter coarse agreement.
pub const DEFAULT_MIN_OVERLAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementConfig {
    #[serde(default)]
    pub metric: DistanceMetric,
    #[serde(default = "default_min_overlap")]
    pub min_overlap: usize,
    #[serde(default)]
    pub strictness: MedianStrictness,
}

fn default_min_overlap() -> usize {
    DEFAULT_MIN_OVERLAP
}

impl Default for DisagreementConfig {
    fn default() -> Self {
        DisagreementConfig {
            metric: DistanceMetric::Ordinal,
            min_overlap: DEFAULT_MIN_OVERLAP,
            strictness: MedianStrictness::Strict,
        }
    }
}

/// One (dimension, domain) cell of the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementCell {
    pub dimension: Dimension,
    pub domain: Domain,
    /// Fine-grained α; `None` when undefined or too little pairable data.
    pub alpha: Option<f64>,
    pub n_units_used: usize,
    pub n_pairable_values: usize,
    /// Mean above-median Jaccard over qualifying evaluator pairs.
    pub coarse_jaccard: Option<f64>,
    pub n_pairs: usize,
    pub n_excluded_pairs: usize,
}

/// Compute every cell for the domains that actually carry scores.
pub fn disagreement_cells(corpus: &Corpus, config: &DisagreementConfig) -> Vec<DisagreementCell> {
    let mut cells = Vec::new();
    for dimension in Dimension::ALL {
        for domain in Domain::ALL {
            let evaluators = corpus.evaluators_in_slice(dimension, domain);
            if evaluators.is_empty() {
                continue;
            }

            let (alpha, n_units_used, n_pairable_values) =
                match corpus.rating_matrix(dimension, domain) {
                    Ok(matrix) => match krippendorff_alpha(&matrix, config.metric) {
                        Ok(report) => (report.alpha, report.n_units_used, report.n_pairable_values),
                        Err(Error::InsufficientPairableData) => (None, 0, 0),
                        Err(e) => unreachable!("corpus-built matrix cannot fail alpha: {e}"),
                    },
                    Err(e) => unreachable!("validated corpus builds valid matrices: {e}"),
                };

            let mut selections = Vec::new();
            for evaluator in &evaluators {
                let scored = corpus.score_map(evaluator, dimension, Some(domain));
                let selected = above_median_set(evaluator, &scored, config.strictness);
                selections.push(
                    OwnerSelections::new(selected, scored.into_keys().collect())
                        .expect("above-median sets only select scored items"),
                );
            }
            let jaccard = pairwise_jaccard(&selections, config.min_overlap);

            cells.push(DisagreementCell {
                dimension,
                domain,
                alpha,
                n_units_used,
                n_pairable_values,
                coarse_jaccard: jaccard.mean,
                n_pairs: jaccard.pairs.len(),
                n_excluded_pairs: jaccard.excluded.len(),
            });
        }
    }
    cells
}

/// Render the summary with one row per (dimension, domain); unavailable
/// values show as `--`.
pub fn disagreement_report(corpus: &Corpus, config: &DisagreementConfig) -> ReportTable {
    let mut table = ReportTable::new(
        "expert_disagreement",
        &[
            "dimension",
            "domain",
            "alpha",
            "n_units",
            "n_pairable",
            "coarse_jaccard",
            "n_pairs",
            "n_excluded_pairs",
        ],
    );
    table.note("metric", config.metric.as_str());
    table.note("min_overlap", config.min_overlap.to_string());
    table.note(
        "coarse_rule",
        "items scored strictly above the evaluator's own median; pairs restricted to shared scored items",
    );
    for cell in disagreement_cells(corpus, config) {
        table.push_row(vec![
            cell.dimension.as_str().into(),
            cell.domain.as_str().into(),
            cell.alpha.into(),
            cell.n_units_used.into(),
            cell.n_pairable_values.into(),
            cell.coarse_jaccard.into(),
            cell.n_pairs.into(),
            cell.n_excluded_pairs.into(),
        ]);
    }
    table
}
