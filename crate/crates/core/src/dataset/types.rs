//! Record types for the corpus: patents, ideas, evaluators, and scores.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dimension;
use crate::error::Error;

/// Technical area a patent (and its evaluators) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "NLP")]
    Nlp,
    #[serde(rename = "CS")]
    Cs,
    #[serde(rename = "MatChem")]
    MatChem,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Nlp, Domain::Cs, Domain::MatChem];

    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::Nlp => "NLP",
            Domain::Cs => "CS",
            Domain::MatChem => "MatChem",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Domain::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown domain {s:?}")))
    }
}

/// Professional background of an evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    Technical,
    Business,
}

/// A patent document ideas are grounded in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patent {
    pub patent_id: String,
    pub domain: Domain,
    pub title: String,
    /// Field is named `abstract` on disk; that's a Rust keyword.
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub claims: Vec<String>,
    #[serde(default)]
    pub description: String,
}

/// A generated product idea grounded in one patent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Idea {
    pub idea_id: String,
    pub patent_id: String,
    pub system_id: String,
    pub title: String,
    pub description: String,
    pub implementation: String,
    pub differentiation: String,
}

impl Idea {
    /// The four content fields joined, used for lexical similarity.
    pub fn full_text(&self) -> String {
        format!(
            "{} {} {} {}",
            self.title, self.description, self.implementation, self.differentiation
        )
    }
}

/// A human expert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluator {
    pub evaluator_id: String,
    pub domain: Domain,
    pub background: Background,
}

/// One evaluator's score of one idea on one dimension: the atomic
/// annotation unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub evaluator_id: String,
    pub idea_id: String,
    pub dimension: Dimension,
    pub score: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl ScoreRecord {
    /// Sort/uniqueness key.
    pub fn key(&self) -> (&str, &str, Dimension) {
        (&self.evaluator_id, &self.idea_id, self.dimension)
    }
}
