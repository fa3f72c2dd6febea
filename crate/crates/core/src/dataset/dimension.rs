//! Scoring dimensions, their scales, gating thresholds, and rubric text.
//!
//! The six dimensions form a staged screening pipeline: `technical_validity`,
//! `need_validity`, and `market_size` are scored only when `specificity`
//! exceeds 2; `innovativeness` and `competitive_advantage` additionally
//! require `technical_validity` above 1. The level-by-level rubric text lives
//! in a JSON asset shipped with the crate and is embedded into judge prompts
//! verbatim.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six business-oriented scoring dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Specificity,
    TechnicalValidity,
    Innovativeness,
    CompetitiveAdvantage,
    NeedValidity,
    MarketSize,
}

impl Dimension {
    /// All dimensions in screening order (upstream gates first).
    pub const ALL: [Dimension; 6] = [
        Dimension::Specificity,
        Dimension::TechnicalValidity,
        Dimension::Innovativeness,
        Dimension::CompetitiveAdvantage,
        Dimension::NeedValidity,
        Dimension::MarketSize,
    ];

    /// Snake-case identifier used in data files and CLI flags.
    pub fn as_str(&self) -> &'static str {
        match self {
            Dimension::Specificity => "specificity",
            Dimension::TechnicalValidity => "technical_validity",
            Dimension::Innovativeness => "innovativeness",
            Dimension::CompetitiveAdvantage => "competitive_advantage",
            Dimension::NeedValidity => "need_validity",
            Dimension::MarketSize => "market_size",
        }
    }

    /// Inclusive scale bounds.
    pub fn scale(&self) -> (i64, i64) {
        match self {
            Dimension::Specificity => (1, 4),
            Dimension::TechnicalValidity => (1, 4),
            Dimension::Innovativeness => (1, 5),
            Dimension::CompetitiveAdvantage => (1, 4),
            Dimension::NeedValidity => (0, 3),
            Dimension::MarketSize => (0, 3),
        }
    }

    pub fn scale_min(&self) -> i64 {
        self.scale().0
    }

    pub fn scale_max(&self) -> i64 {
        self.scale().1
    }

    /// Every admissible score, ascending.
    pub fn value_domain(&self) -> Vec<i64> {
        let (lo, hi) = self.scale();
        (lo..=hi).collect()
    }

    /// Score that must be strictly exceeded before downstream dimensions are
    /// scored. Only specificity and technical validity gate anything.
    pub fn gate_threshold(&self) -> Option<i64> {
        match self {
            Dimension::Specificity => Some(2),
            Dimension::TechnicalValidity => Some(1),
            _ => None,
        }
    }

    /// Upstream gates that must all pass for this dimension to be scored:
    /// `(upstream dimension, threshold to exceed)`.
    pub fn gates(&self) -> &'static [(Dimension, i64)] {
        match self {
            Dimension::Specificity => &[],
            Dimension::TechnicalValidity | Dimension::NeedValidity | Dimension::MarketSize => {
                &[(Dimension::Specificity, 2)]
            }
            Dimension::Innovativeness | Dimension::CompetitiveAdvantage => &[
                (Dimension::Specificity, 2),
                (Dimension::TechnicalValidity, 1),
            ],
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown dimension {s:?}")))
    }
}

/// A dimension's scale, gating threshold, and level-by-level rubric text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub id: Dimension,
    pub scale_min: i64,
    pub scale_max: i64,
    pub gate_threshold: Option<i64>,
    /// One-line summary of what the dimension assesses.
    pub focus: String,
    /// Extra context rendered before the levels (used by competitive
    /// advantage for its sub-questions).
    pub notes: Option<String>,
    /// `(score, description)` for every score in `[scale_min, scale_max]`.
    pub rubric_levels: Vec<(i64, String)>,
}

impl DimensionSpec {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.id.scale();
        if (self.scale_min, self.scale_max) != (lo, hi) {
            return Err(Error::Rubric(format!(
                "{} scale is ({}, {}), expected ({lo}, {hi})",
                self.id, self.scale_min, self.scale_max
            )));
        }
        if self.gate_threshold != self.id.gate_threshold() {
            return Err(Error::Rubric(format!(
                "{} gate threshold is {:?}, expected {:?}",
                self.id,
                self.gate_threshold,
                self.id.gate_threshold()
            )));
        }
        let expected: Vec<i64> = self.id.value_domain();
        let got: Vec<i64> = self.rubric_levels.iter().map(|(s, _)| *s).collect();
        if got != expected {
            return Err(Error::Rubric(format!(
                "{} rubric levels cover {got:?}, expected every score in {expected:?} exactly once",
                self.id
            )));
        }
        Ok(())
    }

    /// Description text of one score level.
    pub fn level(&self, score: i64) -> Option<&str> {
        self.rubric_levels
            .iter()
            .find(|(s, _)| *s == score)
            .map(|(_, text)| text.as_str())
    }
}

/// On-disk shape of one rubric entry.
#[derive(Deserialize)]
struct RawEntry {
    focus: String,
    #[serde(default)]
    notes: Option<String>,
    scale_min: i64,
    scale_max: i64,
    #[serde(default)]
    gate_threshold: Option<i64>,
    levels: BTreeMap<String, String>,
}

/// The full six-dimension rubric.
#[derive(Debug, Clone)]
pub struct RubricSet {
    specs: BTreeMap<Dimension, DimensionSpec>,
}

const BUILTIN_RUBRIC: &str = include_str!("../../assets/rubric.json");

impl RubricSet {
    /// The rubric asset shipped with the crate.
    pub fn builtin() -> RubricSet {
        Self::from_json(BUILTIN_RUBRIC).expect("builtin rubric asset is valid")
    }

    pub fn from_path(path: &Path) -> Result<RubricSet> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<RubricSet> {
        let raw: BTreeMap<String, RawEntry> =
            serde_json::from_str(text).map_err(|e| Error::Rubric(e.to_string()))?;
        let mut specs = BTreeMap::new();
        for (name, entry) in raw {
            let id: Dimension = name.parse()?;
            let mut rubric_levels = Vec::new();
            for (score_key, text) in &entry.levels {
                let score: i64 = score_key
                    .parse()
                    .map_err(|_| Error::Rubric(format!("non-integer level key {score_key:?}")))?;
                rubric_levels.push((score, text.clone()));
            }
            rubric_levels.sort_by_key(|(s, _)| *s);
            let spec = DimensionSpec {
                id,
                scale_min: entry.scale_min,
                scale_max: entry.scale_max,
                gate_threshold: entry.gate_threshold,
                focus: entry.focus,
                notes: entry.notes,
                rubric_levels,
            };
            spec.validate()?;
            specs.insert(id, spec);
        }
        for d in Dimension::ALL {
            if !specs.contains_key(&d) {
                return Err(Error::Rubric(format!("rubric is missing dimension {d}")));
            }
        }
        Ok(RubricSet { specs })
    }

    pub fn spec(&self, dimension: Dimension) -> &DimensionSpec {
        &self.specs[&dimension]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DimensionSpec> {
        self.specs.values()
    }
}
