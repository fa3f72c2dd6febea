//! Chance-corrected reliability over incomplete rating matrices.
//!
//! α = 1 − D_o/D_e via the coincidence-matrix formulation. Units with
//! fewer than two ratings are dropped. With `n` pairable values and
//! coincidences `o_ck`:
//!
//! ```text
//! D_o = (1/n)        Σ_{c,k}   o_ck δ²(c,k)
//! D_e = (1/(n(n−1))) Σ_{c≠k}  n_c n_k δ²(c,k)
//! ```
//!
//! When every pairing is of identical values and no variation exists,
//! D_e = 0 and α is undefined; that is reported as a flag, never as a
//! number.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agreement::RatingMatrix;
use crate::error::{Error, Result};

/// Squared distance δ²(c, k) between two scale values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// 0 when equal, 1 otherwise.
    Nominal,
    /// Cumulative-marginal rank distance; the default for ordered Likert
    /// scales.
    #[default]
    Ordinal,
    /// (c − k)².
    Interval,
}

impl DistanceMetric {
    pub const ALL: [DistanceMetric; 3] = [
        DistanceMetric::Nominal,
        DistanceMetric::Ordinal,
        DistanceMetric::Interval,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMetric::Nominal => "nominal",
            DistanceMetric::Ordinal => "ordinal",
            DistanceMetric::Interval => "interval",
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<DistanceMetric> {
        DistanceMetric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown distance metric {s:?}")))
    }
}

/// Result of one α computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// `None` means undefined (expected disagreement is zero).
    pub alpha: Option<f64>,
    /// Units that survived the ≥ 2 ratings cut.
    pub n_units_used: usize,
    /// Total ratings inside the surviving units.
    pub n_pairable_values: usize,
    pub metric: DistanceMetric,
}

/// Squared distances for each ordered value pair, given the coincidence
/// marginals. Ordinal distance depends on the marginals; nominal and
/// interval do not.
fn distance_table(metric: DistanceMetric, values: &[i64], marginals: &[f64]) -> Vec<Vec<f64>> {
    let v = values.len();
    let mut table = vec![vec![0.0; v]; v];
    for c in 0..v {
        for k in 0..v {
            table[c][k] = match metric {
                DistanceMetric::Nominal => {
                    if c == k {
                        0.0
                    } else {
                        1.0
                    }
                }
                DistanceMetric::Interval => {
                    let d = (values[c] - values[k]) as f64;
                    d * d
                }
                DistanceMetric::Ordinal => {
                    let (lo, hi) = if c <= k { (c, k) } else { (k, c) };
                    let between: f64 = marginals[lo..=hi].iter().sum();
                    let d = between - (marginals[c] + marginals[k]) / 2.0;
                    d * d
                }
            };
        }
    }
    table
}

/// Krippendorff's α for `matrix` under `metric`.
///
/// Errors when no unit carries at least two ratings. Returns
/// `alpha: None` when expected disagreement is zero.
pub fn krippendorff_alpha(
    matrix: &RatingMatrix,
    metric: DistanceMetric,
) -> Result<AgreementReport> {
    let values = matrix.value_domain();
    let v = values.len();
    let index_of = |value: i64| {
        values
            .binary_search(&value)
            .expect("validated on construction")
    };

    // Coincidence matrix and marginals over pairable units only.
    let mut coincidence = vec![vec![0.0; v]; v];
    let mut marginals = vec![0.0; v];
    let mut n_units_used = 0;
    let mut n_pairable_values = 0usize;
    for unit in 0..matrix.units().len() {
        let unit_values = matrix.unit_values(unit);
        let m = unit_values.len();
        if m < 2 {
            continue;
        }
        n_units_used += 1;
        n_pairable_values += m;
        let weight = 1.0 / (m as f64 - 1.0);
        for (i, &a) in unit_values.iter().enumerate() {
            marginals[index_of(a)] += 1.0;
            for (j, &b) in unit_values.iter().enumerate() {
                if i != j {
                    coincidence[index_of(a)][index_of(b)] += weight;
                }
            }
        }
    }
    if n_units_used == 0 {
        return Err(Error::InsufficientPairableData);
    }

    let delta = distance_table(metric, values, &marginals);
    let mut observed = 0.0; // Σ o_ck δ²
    let mut expected = 0.0; // Σ_{c≠k} n_c n_k δ²
    for c in 0..v {
        for k in 0..v {
            observed += coincidence[c][k] * delta[c][k];
            if c != k {
                expected += marginals[c] * marginals[k] * delta[c][k];
            }
        }
    }

    // α = 1 − D_o/D_e = 1 − (n−1)·Σoδ² / Σ n_c n_k δ². Keeping the ratio in
    // this form makes perfect agreement exactly 1.0.
    let n = n_pairable_values as f64;
    let alpha = if expected == 0.0 || n_pairable_values < 2 {
        None
    } else {
        Some(1.0 - (n - 1.0) * observed / expected)
    };
    Ok(AgreementReport {
        alpha,
        n_units_used,
        n_pairable_values,
        metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_rater(pairs: &[(i64, i64)], domain: Vec<i64>) -> RatingMatrix {
        let cells: Vec<(Option<i64>, Option<i64>)> =
            pairs.iter().map(|&(a, b)| (Some(a), Some(b))).collect();
        RatingMatrix::from_two_raters("a", "b", &cells, domain).unwrap()
    }

    #[test]
    fn perfect_agreement_is_exactly_one_under_every_metric() {
        let m = two_rater(&[(1, 1), (2, 2), (3, 3), (4, 4)], vec![1, 2, 3, 4]);
        for metric in DistanceMetric::ALL {
            let report = krippendorff_alpha(&m, metric).unwrap();
            assert_eq!(report.alpha, Some(1.0));
            assert_eq!(report.n_units_used, 4);
            assert_eq!(report.n_pairable_values, 8);
        }
    }

    #[test]
    fn opposed_binary_pair_is_minus_half_under_every_metric() {
        // Coincidences o_12 = o_21 = 2, so D_o = 1 and D_e = 2/3 (nominal);
        // the ordinal and interval scalings cancel to the same ratio.
        let m = two_rater(&[(1, 2), (2, 1)], vec![1, 2]);
        for metric in DistanceMetric::ALL {
            let report = krippendorff_alpha(&m, metric).unwrap();
            assert_relative_eq!(report.alpha.unwrap(), -0.5, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_repeated_value_is_undefined_not_a_number() {
        let m = two_rater(&[(3, 3), (3, 3)], vec![1, 2, 3, 4]);
        for metric in DistanceMetric::ALL {
            let report = krippendorff_alpha(&m, metric).unwrap();
            assert_eq!(report.alpha, None);
        }
    }

    #[test]
    fn no_pairable_unit_is_an_error() {
        let m = RatingMatrix::from_two_raters(
            "a",
            "b",
            &[(Some(1), None), (None, Some(2))],
            vec![1, 2],
        )
        .unwrap();
        assert!(matches!(
            krippendorff_alpha(&m, DistanceMetric::Ordinal),
            Err(Error::InsufficientPairableData)
        ));
    }

    #[test]
    fn unpairable_units_are_dropped_from_the_tally() {
        let m = RatingMatrix::from_two_raters(
            "a",
            "b",
            &[(Some(1), Some(1)), (Some(2), None), (Some(2), Some(2))],
            vec![1, 2],
        )
        .unwrap();
        let report = krippendorff_alpha(&m, DistanceMetric::Nominal).unwrap();
        assert_eq!(report.n_units_used, 2);
        assert_eq!(report.n_pairable_values, 4);
        assert_eq!(report.alpha, Some(1.0));
    }

    /// Textbook worked example: four raters, twelve units, missing cells.
    /// Nominal α is known to be 0.743 (to three decimals).
    #[test]
    fn four_rater_reference_matrix_matches_published_nominal_value() {
        let a = [
            Some(1),
            Some(2),
            Some(3),
            Some(3),
            Some(2),
            Some(1),
            Some(4),
            Some(1),
            Some(2),
            None,
            None,
            None,
        ];
        let b = [
            Some(1),
            Some(2),
            Some(3),
            Some(3),
            Some(2),
            Some(2),
            Some(4),
            Some(1),
            Some(2),
            Some(5),
            None,
            Some(3),
        ];
        let c = [
            None,
            Some(3),
            Some(3),
            Some(3),
            Some(2),
            Some(3),
            Some(4),
            Some(2),
            Some(2),
            Some(5),
            Some(1),
            None,
        ];
        let d = [
            Some(1),
            Some(2),
            Some(3),
            Some(3),
            Some(2),
            Some(4),
            Some(4),
            Some(1),
            Some(2),
            Some(5),
            Some(1),
            None,
        ];
        let units: Vec<String> = (0..12).map(|i| format!("u{i}")).collect();
        let raters: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let mut cells = Vec::new();
        for (r, column) in [a, b, c, d].iter().enumerate() {
            for (u, value) in column.iter().enumerate() {
                if let Some(v) = value {
                    cells.push((units[u].clone(), raters[r].clone(), *v));
                }
            }
        }
        let m = RatingMatrix::new(units, raters, cells, vec![1, 2, 3, 4, 5]).unwrap();
        let report = krippendorff_alpha(&m, DistanceMetric::Nominal).unwrap();
        assert_eq!(report.n_units_used, 11); // u11 carries a single rating and is dropped.
        assert_eq!(report.n_pairable_values, 40);
        assert_relative_eq!(report.alpha.unwrap(), 0.743, max_relative = 1e-3);
    }

    /// Independent check: expand the coincidence tally into an explicit
    /// enumeration of every ordered within-unit value pair.
    fn brute_force_alpha(m: &RatingMatrix, metric: DistanceMetric) -> Option<f64> {
        let values = m.value_domain();
        let mut pairable: Vec<Vec<i64>> = Vec::new();
        for unit in 0..m.units().len() {
            let vs = m.unit_values(unit);
            if vs.len() >= 2 {
                pairable.push(vs);
            }
        }
        let flat: Vec<i64> = pairable.iter().flatten().copied().collect();
        let n = flat.len() as f64;
        let marginals: Vec<f64> = values
            .iter()
            .map(|&v| flat.iter().filter(|&&x| x == v).count() as f64)
            .collect();
        let delta = distance_table(metric, values, &marginals);
        let idx = |v: i64| values.binary_search(&v).unwrap();
        let mut d_o = 0.0;
        for unit in &pairable {
            let m_u = unit.len() as f64;
            for (i, &x) in unit.iter().enumerate() {
                for (j, &y) in unit.iter().enumerate() {
                    if i != j {
                        d_o += delta[idx(x)][idx(y)] / (m_u - 1.0);
                    }
                }
            }
        }
        d_o /= n;
        let mut d_e = 0.0;
        for (i, &x) in flat.iter().enumerate() {
            for (j, &y) in flat.iter().enumerate() {
                if i != j {
                    d_e += delta[idx(x)][idx(y)];
                }
            }
        }
        d_e /= n * (n - 1.0);
        (d_e != 0.0).then(|| 1.0 - d_o / d_e)
    }

    proptest::proptest! {
        #[test]
        fn matches_brute_force_enumeration(
            cells in proptest::collection::vec(
                (0usize..8, 0usize..4, 1i64..=5),
                4..60,
            )
        ) {
            let units: Vec<String> = (0..8).map(|i| format!("u{i}")).collect();
            let raters: Vec<String> = (0..4).map(|i| format!("r{i}")).collect();
            let mut seen = std::collections::BTreeSet::new();
            let triples: Vec<(String, String, i64)> = cells
                .into_iter()
                .filter(|&(u, r, _)| seen.insert((u, r)))
                .map(|(u, r, v)| (units[u].clone(), raters[r].clone(), v))
                .collect();
            let m = RatingMatrix::new(units, raters, triples, vec![1, 2, 3, 4, 5]).unwrap();
            for metric in DistanceMetric::ALL {
                let ours = krippendorff_alpha(&m, metric);
                match ours {
                    Err(Error::InsufficientPairableData) => {
                        proptest::prop_assert!(
                            (0..m.units().len()).all(|u| m.unit_values(u).len() < 2)
                        );
                    }
                    Ok(report) => {
                        let expected = brute_force_alpha(&m, metric);
                        match (report.alpha, expected) {
                            (Some(a), Some(b)) => {
                                proptest::prop_assert!((a - b).abs() < 1e-9);
                                proptest::prop_assert!(a <= 1.0 + 1e-12);
                            }
                            (None, None) => {}
                            other => proptest::prop_assert!(false, "mismatch: {other:?}"),
                        }
                    }
                    Err(e) => proptest::prop_assert!(false, "unexpected error {e:?}"),
                }
            }
        }

        #[test]
        fn invariant_under_unit_and_rater_permutation(
            pairs in proptest::collection::vec((1i64..=4, 1i64..=4), 2..20),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let m = {
                let cells: Vec<(Option<i64>, Option<i64>)> =
                    pairs.iter().map(|&(a, b)| (Some(a), Some(b))).collect();
                RatingMatrix::from_two_raters("a", "b", &cells, vec![1, 2, 3, 4]).unwrap()
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut rng);
            let swapped: Vec<(Option<i64>, Option<i64>)> =
                shuffled.iter().map(|&(a, b)| (Some(b), Some(a))).collect();
            let m2 = RatingMatrix::from_two_raters("b", "a", &swapped, vec![1, 2, 3, 4]).unwrap();
            for metric in DistanceMetric::ALL {
                let r1 = krippendorff_alpha(&m, metric).unwrap();
                let r2 = krippendorff_alpha(&m2, metric).unwrap();
                match (r1.alpha, r2.alpha) {
                    (Some(a), Some(b)) => proptest::prop_assert!((a - b).abs() < 1e-9),
                    (a, b) => proptest::prop_assert_eq!(a, b),
                }
            }
        }
    }
}
