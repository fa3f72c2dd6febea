//! Coarse selection statistics: above-median sets, pairwise Jaccard with a
//! minimum-overlap rule, and top-half ranking overlap.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Items one owner singled out, always a subset of what they scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionSet {
    pub owner: String,
    pub items: BTreeSet<String>,
}

/// How ties at the median are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianStrictness {
    /// Keep only items strictly above the median (the default reading).
    #[default]
    Strict,
    /// Keep items at or above the median.
    Inclusive,
}

/// Median of a non-empty integer sample: middle element, or the mean of the
/// two middle elements for even sizes.
fn median(values: &mut [i64]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
    }
}

/// Items an owner rated above their own median. An empty score map yields
/// an empty selection.
pub fn above_median_set(
    owner: &str,
    scores: &BTreeMap<String, i64>,
    strictness: MedianStrictness,
) -> SelectionSet {
    let mut items = BTreeSet::new();
    if !scores.is_empty() {
        let mut values: Vec<i64> = scores.values().copied().collect();
        let median = median(&mut values);
        for (item, &score) in scores {
            let keep = match strictness {
                MedianStrictness::Strict => (score as f64) > median,
                MedianStrictness::Inclusive => (score as f64) >= median,
            };
            if keep {
                items.insert(item.clone());
            }
        }
    }
    SelectionSet {
        owner: owner.to_string(),
        items,
    }
}

/// One owner's selection set together with the full set of items they
/// scored. The selection is validated to be a subset of the scored items.
#[derive(Debug, Clone)]
pub struct OwnerSelections {
    pub owner: String,
    pub selected: BTreeSet<String>,
    pub scored: BTreeSet<String>,
}

impl OwnerSelections {
    pub fn new(selection: SelectionSet, scored: BTreeSet<String>) -> Result<OwnerSelections> {
        if let Some(stray) = selection.items.difference(&scored).next() {
            return Err(Error::Matrix(format!(
                "selection of {} contains unscored item {stray}",
                selection.owner
            )));
        }
        Ok(OwnerSelections {
            owner: selection.owner,
            selected: selection.items,
            scored,
        })
    }
}

/// A pair that met the overlap rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairJaccard {
    pub left: String,
    pub right: String,
    /// Items both owners scored.
    pub shared_items: usize,
    pub jaccard: f64,
}

/// A pair excluded for sharing too few scored items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcludedPair {
    pub left: String,
    pub right: String,
    pub shared_items: usize,
}

/// Output of [`pairwise_jaccard`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JaccardReport {
    /// Mean over qualifying pairs; `None` when no pair qualifies.
    pub mean: Option<f64>,
    pub pairs: Vec<PairJaccard>,
    pub excluded: Vec<ExcludedPair>,
    pub min_overlap: usize,
}

/// Plain Jaccard similarity. Two empty sets count as fully agreeing (both
/// sides singled out nothing).
pub fn jaccard_similarity(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Jaccard similarity of two selections after restricting both to the
/// pair's shared scored items. Two empty restricted selections count as
/// fully agreeing (both owners singled out nothing among the shared items).
fn restricted_jaccard(
    left: &OwnerSelections,
    right: &OwnerSelections,
    shared: &BTreeSet<String>,
) -> f64 {
    let a: BTreeSet<String> = left.selected.intersection(shared).cloned().collect();
    let b: BTreeSet<String> = right.selected.intersection(shared).cloned().collect();
    jaccard_similarity(&a, &b)
}

/// Mean Jaccard similarity of selection sets over every owner pair sharing
/// at least `min_overlap` scored items. Sub-threshold pairs are excluded
/// and reported. Owners are compared in sorted id order.
pub fn pairwise_jaccard(owners: &[OwnerSelections], min_overlap: usize) -> JaccardReport {
    let mut sorted: Vec<&OwnerSelections> = owners.iter().collect();
    sorted.sort_by(|a, b| a.owner.cmp(&b.owner));
    let mut pairs = Vec::new();
    let mut excluded = Vec::new();
    for (i, left) in sorted.iter().enumerate() {
        for right in &sorted[i + 1..] {
            let shared: BTreeSet<String> =
                left.scored.intersection(&right.scored).cloned().collect();
            if shared.len() < min_overlap {
                excluded.push(ExcludedPair {
                    left: left.owner.clone(),
                    right: right.owner.clone(),
                    shared_items: shared.len(),
                });
                continue;
            }
            pairs.push(PairJaccard {
                left: left.owner.clone(),
                right: right.owner.clone(),
                shared_items: shared.len(),
                jaccard: restricted_jaccard(left, right, &shared),
            });
        }
    }
    let mean = (!pairs.is_empty())
        .then(|| pairs.iter().map(|p| p.jaccard).sum::<f64>() / pairs.len() as f64);
    JaccardReport {
        mean,
        pairs,
        excluded,
        min_overlap,
    }
}

/// Ranks `scores` descending, breaking ties by ascending item id, and
/// returns the top ⌈n/2⌉ item ids.
fn top_half(scores: &BTreeMap<&String, i64>) -> BTreeSet<String> {
    let mut ranked: Vec<(&String, i64)> = scores.iter().map(|(&k, &v)| (k, v)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let take = ranked.len().div_ceil(2);
    ranked[..take].iter().map(|(k, _)| (*k).clone()).collect()
}

/// Fraction of the reference's top-half items that also sit in the
/// candidate's top half, computed over the items both sides scored.
/// Requires at least two shared items.
pub fn top_half_overlap(
    reference: &BTreeMap<String, i64>,
    candidate: &BTreeMap<String, i64>,
) -> Result<f64> {
    let shared: Vec<&String> = reference
        .keys()
        .filter(|k| candidate.contains_key(*k))
        .collect();
    if shared.len() < 2 {
        return Err(Error::InsufficientSharedItems {
            found: shared.len(),
        });
    }
    let ref_scores: BTreeMap<&String, i64> = shared.iter().map(|&k| (k, reference[k])).collect();
    let cand_scores: BTreeMap<&String, i64> = shared.iter().map(|&k| (k, candidate[k])).collect();
    let ref_top = top_half(&ref_scores);
    let cand_top = top_half(&cand_scores);
    Ok(ref_top.intersection(&cand_top).count() as f64 / ref_top.len() as f64)
}
