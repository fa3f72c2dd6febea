//! Units-by-raters rating matrix with missing cells.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Sparse reliability matrix: rows are units (the things rated), columns
/// are raters, and a cell holds one integer rating. Cells may be missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    units: Vec<String>,
    raters: Vec<String>,
    /// `(unit index, rater index) -> value`.
    cells: BTreeMap<(usize, usize), i64>,
    /// Sorted distinct admissible values (the measurement scale).
    value_domain: Vec<i64>,
}

impl RatingMatrix {
    /// Build a matrix from `(unit, rater, value)` triples. Every referenced
    /// unit and rater must appear in the corresponding id list, each cell may
    /// be filled at most once, and every value must lie in `value_domain`.
    pub fn new(
        units: Vec<String>,
        raters: Vec<String>,
        cells: Vec<(String, String, i64)>,
        mut value_domain: Vec<i64>,
    ) -> Result<RatingMatrix> {
        value_domain.sort_unstable();
        value_domain.dedup();
        let unit_idx: BTreeMap<&str, usize> = units
            .iter()
            .enumerate()
            .map(|(i, u)| (u.as_str(), i))
            .collect();
        if unit_idx.len() != units.len() {
            return Err(Error::Matrix("duplicate unit id".into()));
        }
        let rater_idx: BTreeMap<&str, usize> = raters
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_str(), i))
            .collect();
        if rater_idx.len() != raters.len() {
            return Err(Error::Matrix("duplicate rater id".into()));
        }
        let mut map = BTreeMap::new();
        for (unit, rater, value) in cells {
            let &u = unit_idx
                .get(unit.as_str())
                .ok_or_else(|| Error::Matrix(format!("unknown unit {unit}")))?;
            let &r = rater_idx
                .get(rater.as_str())
                .ok_or_else(|| Error::Matrix(format!("unknown rater {rater}")))?;
            if value_domain.binary_search(&value).is_err() {
                return Err(Error::Matrix(format!(
                    "value {value} for ({unit}, {rater}) is outside the value domain"
                )));
            }
            if map.insert((u, r), value).is_some() {
                return Err(Error::Matrix(format!("duplicate cell ({unit}, {rater})")));
            }
        }
        Ok(RatingMatrix {
            units,
            raters,
            cells: map,
            value_domain,
        })
    }

    /// Two-rater convenience constructor over paired value columns. `None`
    /// marks a missing cell.
    pub fn from_two_raters(
        left_name: &str,
        right_name: &str,
        pairs: &[(Option<i64>, Option<i64>)],
        value_domain: Vec<i64>,
    ) -> Result<RatingMatrix> {
        let units: Vec<String> = (0..pairs.len()).map(|i| format!("u{i}")).collect();
        let mut cells = Vec::new();
        for (i, &(left, right)) in pairs.iter().enumerate() {
            if let Some(v) = left {
                cells.push((units[i].clone(), left_name.to_string(), v));
            }
            if let Some(v) = right {
                cells.push((units[i].clone(), right_name.to_string(), v));
            }
        }
        RatingMatrix::new(
            units,
            vec![left_name.to_string(), right_name.to_string()],
            cells,
            value_domain,
        )
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn value_domain(&self) -> &[i64] {
        &self.value_domain
    }

    pub fn value(&self, unit: usize, rater: usize) -> Option<i64> {
        self.cells.get(&(unit, rater)).copied()
    }

    /// Values present in one unit's row, in rater order.
    pub fn unit_values(&self, unit: usize) -> Vec<i64> {
        (0..self.raters.len())
            .filter_map(|r| self.value(unit, r))
            .collect()
    }

    /// Number of filled cells.
    pub fn n_values(&self) -> usize {
        self.cells.len()
    }
}
