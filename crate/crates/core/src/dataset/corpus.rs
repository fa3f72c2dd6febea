//! The corpus: four record collections, fully cross-indexed, immutable
//! after loading.
//!
//! On disk a corpus is four line-delimited JSON files (one object per line,
//! UTF-8): `patents.jsonl`, `ideas.jsonl`, `evaluators.jsonl`,
//! `scores.jsonl`. Loading validates foreign keys, rejects duplicate keys,
//! and fails fast on scores outside their dimension's scale. An evaluator
//! scoring outside their own domain is recorded as a warning, not an error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::agreement::RatingMatrix;
use crate::dataset::{Dimension, Domain, Evaluator, Idea, Patent, ScoreRecord};
use crate::error::{Error, Result};

/// Locations of the four corpus files.
#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub patents: PathBuf,
    pub ideas: PathBuf,
    pub evaluators: PathBuf,
    pub scores: PathBuf,
}

impl CorpusPaths {
    /// Conventional file names under one directory.
    pub fn in_dir(dir: &Path) -> CorpusPaths {
        CorpusPaths {
            patents: dir.join("patents.jsonl"),
            ideas: dir.join("ideas.jsonl"),
            evaluators: dir.join("evaluators.jsonl"),
            scores: dir.join("scores.jsonl"),
        }
    }
}

/// Per-domain row of [`Corpus::coverage_stats`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageRow {
    pub domain: String,
    pub n_evaluators: usize,
    pub n_patents: usize,
    pub n_ideas: usize,
    pub n_annotations: usize,
}

/// Loaded, validated, and indexed corpus. Immutable after load.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    patents: Vec<Patent>,
    ideas: Vec<Idea>,
    evaluators: Vec<Evaluator>,
    scores: Vec<ScoreRecord>,

    patent_by_id: BTreeMap<String, usize>,
    idea_by_id: BTreeMap<String, usize>,
    evaluator_by_id: BTreeMap<String, usize>,
    ideas_by_patent: BTreeMap<String, Vec<usize>>,
    scores_by_evaluator_dim: BTreeMap<(String, Dimension), Vec<usize>>,
    scores_by_idea_dim: BTreeMap<(String, Dimension), Vec<usize>>,

    warnings: Vec<String>,
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    for record in records {
        let line =
            serde_json::to_string(record).map_err(|e| Error::parse(path, 0, e.to_string()))?;
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

impl Corpus {
    /// Assemble a corpus from in-memory collections, running the same
    /// validation the file loader does.
    pub fn from_parts(
        patents: Vec<Patent>,
        ideas: Vec<Idea>,
        evaluators: Vec<Evaluator>,
        scores: Vec<ScoreRecord>,
    ) -> Result<Corpus> {
        let mut corpus = Corpus {
            patents,
            ideas,
            evaluators,
            scores,
            ..Corpus::default()
        };
        corpus.validate_and_index()?;
        Ok(corpus)
    }

    /// Load the four corpus files.
    pub fn load(paths: &CorpusPaths) -> Result<Corpus> {
        Self::from_parts(
            read_jsonl(&paths.patents)?,
            read_jsonl(&paths.ideas)?,
            read_jsonl(&paths.evaluators)?,
            read_jsonl(&paths.scores)?,
        )
    }

    /// Load from a directory using the conventional file names.
    pub fn load_dir(dir: &Path) -> Result<Corpus> {
        Self::load(&CorpusPaths::in_dir(dir))
    }

    /// Write the four corpus files in deterministic (sorted) order.
    /// `load ∘ save` is an identity.
    pub fn save(&self, paths: &CorpusPaths) -> Result<()> {
        let mut patents = self.patents.clone();
        patents.sort_by(|a, b| a.patent_id.cmp(&b.patent_id));
        let mut ideas = self.ideas.clone();
        ideas.sort_by(|a, b| a.idea_id.cmp(&b.idea_id));
        let mut evaluators = self.evaluators.clone();
        evaluators.sort_by(|a, b| a.evaluator_id.cmp(&b.evaluator_id));
        let mut scores = self.scores.clone();
        scores.sort_by(|a, b| a.key().cmp(&b.key()));

        write_jsonl(&paths.patents, &patents)?;
        write_jsonl(&paths.ideas, &ideas)?;
        write_jsonl(&paths.evaluators, &evaluators)?;
        write_jsonl(&paths.scores, &scores)
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.save(&CorpusPaths::in_dir(dir))
    }

    fn validate_and_index(&mut self) -> Result<()> {
        self.scores.sort_by(|a, b| a.key().cmp(&b.key()));

        for patent in &self.patents {
            if self
                .patent_by_id
                .insert(patent.patent_id.clone(), usize::MAX)
                .is_some()
            {
                return Err(Error::DuplicateKey {
                    kind: "patent",
                    key: patent.patent_id.clone(),
                });
            }
        }
        self.patent_by_id.clear();
        for (i, patent) in self.patents.iter().enumerate() {
            self.patent_by_id.insert(patent.patent_id.clone(), i);
        }

        for (i, idea) in self.ideas.iter().enumerate() {
            if self.idea_by_id.insert(idea.idea_id.clone(), i).is_some() {
                return Err(Error::DuplicateKey {
                    kind: "idea",
                    key: idea.idea_id.clone(),
                });
            }
            if !self.patent_by_id.contains_key(&idea.patent_id) {
                return Err(Error::ForeignKey {
                    kind: "idea",
                    key: idea.idea_id.clone(),
                    target_kind: "patent",
                    target_key: idea.patent_id.clone(),
                });
            }
            for (field, value) in [
                ("title", &idea.title),
                ("description", &idea.description),
                ("implementation", &idea.implementation),
                ("differentiation", &idea.differentiation),
            ] {
                if value.trim().is_empty() {
                    return Err(Error::EmptyField {
                        kind: "idea",
                        key: idea.idea_id.clone(),
                        field,
                    });
                }
            }
            self.ideas_by_patent
                .entry(idea.patent_id.clone())
                .or_default()
                .push(i);
        }

        for (i, evaluator) in self.evaluators.iter().enumerate() {
            if self
                .evaluator_by_id
                .insert(evaluator.evaluator_id.clone(), i)
                .is_some()
            {
                return Err(Error::DuplicateKey {
                    kind: "evaluator",
                    key: evaluator.evaluator_id.clone(),
                });
            }
        }

        for (i, score) in self.scores.iter().enumerate() {
            if i > 0 && self.scores[i - 1].key() == score.key() {
                return Err(Error::DuplicateKey {
                    kind: "score",
                    key: format!(
                        "({}, {}, {})",
                        score.evaluator_id, score.idea_id, score.dimension
                    ),
                });
            }
            let Some(&evaluator_idx) = self.evaluator_by_id.get(&score.evaluator_id) else {
                return Err(Error::ForeignKey {
                    kind: "score",
                    key: format!("({}, {})", score.evaluator_id, score.idea_id),
                    target_kind: "evaluator",
                    target_key: score.evaluator_id.clone(),
                });
            };
            let Some(&idea_idx) = self.idea_by_id.get(&score.idea_id) else {
                return Err(Error::ForeignKey {
                    kind: "score",
                    key: format!("({}, {})", score.evaluator_id, score.idea_id),
                    target_kind: "idea",
                    target_key: score.idea_id.clone(),
                });
            };
            let (min, max) = score.dimension.scale();
            if score.score < min || score.score > max {
                return Err(Error::ScoreOutOfRange {
                    evaluator_id: score.evaluator_id.clone(),
                    idea_id: score.idea_id.clone(),
                    dimension: score.dimension.to_string(),
                    score: score.score,
                    min,
                    max,
                });
            }
            let idea_domain =
                self.patents[self.patent_by_id[&self.ideas[idea_idx].patent_id]].domain;
            let evaluator_domain = self.evaluators[evaluator_idx].domain;
            if idea_domain != evaluator_domain {
                self.warnings.push(format!(
                    "evaluator {} ({evaluator_domain}) scored idea {} in domain {idea_domain}",
                    score.evaluator_id, score.idea_id
                ));
            }
            self.scores_by_evaluator_dim
                .entry((score.evaluator_id.clone(), score.dimension))
                .or_default()
                .push(i);
            self.scores_by_idea_dim
                .entry((score.idea_id.clone(), score.dimension))
                .or_default()
                .push(i);
        }
        Ok(())
    }

    pub fn patents(&self) -> &[Patent] {
        &self.patents
    }

    pub fn ideas(&self) -> &[Idea] {
        &self.ideas
    }

    pub fn evaluators(&self) -> &[Evaluator] {
        &self.evaluators
    }

    pub fn scores(&self) -> &[ScoreRecord] {
        &self.scores
    }

    /// Cross-domain scoring warnings collected at load time.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn patent(&self, patent_id: &str) -> Option<&Patent> {
        self.patent_by_id.get(patent_id).map(|&i| &self.patents[i])
    }

    pub fn idea(&self, idea_id: &str) -> Option<&Idea> {
        self.idea_by_id.get(idea_id).map(|&i| &self.ideas[i])
    }

    pub fn evaluator(&self, evaluator_id: &str) -> Option<&Evaluator> {
        self.evaluator_by_id
            .get(evaluator_id)
            .map(|&i| &self.evaluators[i])
    }

    /// Domain of the patent an idea is grounded in.
    pub fn idea_domain(&self, idea_id: &str) -> Option<Domain> {
        let idea = self.idea(idea_id)?;
        self.patent(&idea.patent_id).map(|p| p.domain)
    }

    pub fn scores_for_evaluator(
        &self,
        evaluator_id: &str,
        dimension: Dimension,
    ) -> impl Iterator<Item = &ScoreRecord> {
        self.scores_by_evaluator_dim
            .get(&(evaluator_id.to_string(), dimension))
            .into_iter()
            .flatten()
            .map(|&i| &self.scores[i])
    }

    pub fn scores_for_idea(
        &self,
        idea_id: &str,
        dimension: Dimension,
    ) -> impl Iterator<Item = &ScoreRecord> {
        self.scores_by_idea_dim
            .get(&(idea_id.to_string(), dimension))
            .into_iter()
            .flatten()
            .map(|&i| &self.scores[i])
    }

    /// One evaluator's `(idea, dimension)` score lookup.
    pub fn score(&self, evaluator_id: &str, idea_id: &str, dimension: Dimension) -> Option<i64> {
        self.scores_for_evaluator(evaluator_id, dimension)
            .find(|r| r.idea_id == idea_id)
            .map(|r| r.score)
    }

    /// Arithmetic mean score per evaluator over the given dimension.
    /// Evaluators with no records for the dimension are omitted.
    pub fn evaluator_means(&self, dimension: Dimension) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for evaluator in &self.evaluators {
            let scores: Vec<i64> = self
                .scores_for_evaluator(&evaluator.evaluator_id, dimension)
                .map(|r| r.score)
                .collect();
            if !scores.is_empty() {
                let mean = scores.iter().sum::<i64>() as f64 / scores.len() as f64;
                out.insert(evaluator.evaluator_id.clone(), mean);
            }
        }
        out
    }

    /// Counts per domain plus a totals row, in the shape of a coverage table.
    pub fn coverage_stats(&self) -> Vec<CoverageRow> {
        let mut rows = Vec::new();
        let mut total = CoverageRow {
            domain: "Total".to_string(),
            n_evaluators: 0,
            n_patents: 0,
            n_ideas: 0,
            n_annotations: 0,
        };
        for domain in Domain::ALL {
            let n_evaluators = self
                .evaluators
                .iter()
                .filter(|e| e.domain == domain)
                .count();
            let n_patents = self.patents.iter().filter(|p| p.domain == domain).count();
            let n_ideas = self
                .ideas
                .iter()
                .filter(|i| self.patent(&i.patent_id).map(|p| p.domain) == Some(domain))
                .count();
            let n_annotations = self
                .scores
                .iter()
                .filter(|s| self.idea_domain(&s.idea_id) == Some(domain))
                .count();
            total.n_evaluators += n_evaluators;
            total.n_patents += n_patents;
            total.n_ideas += n_ideas;
            total.n_annotations += n_annotations;
            rows.push(CoverageRow {
                domain: domain.to_string(),
                n_evaluators,
                n_patents,
                n_ideas,
                n_annotations,
            });
        }
        rows.push(total);
        rows
    }

    /// Evaluator ids with at least one score on `(dimension, domain)`,
    /// sorted.
    pub fn evaluators_in_slice(&self, dimension: Dimension, domain: Domain) -> Vec<String> {
        let mut out = BTreeSet::new();
        for score in &self.scores {
            if score.dimension == dimension && self.idea_domain(&score.idea_id) == Some(domain) {
                out.insert(score.evaluator_id.clone());
            }
        }
        out.into_iter().collect()
    }

    /// Units × raters matrix for one `(dimension, domain)` slice: units are
    /// idea ids, raters are evaluator ids, cells are scores.
    pub fn rating_matrix(&self, dimension: Dimension, domain: Domain) -> Result<RatingMatrix> {
        let raters = self.evaluators_in_slice(dimension, domain);
        let mut units = BTreeSet::new();
        let mut cells = Vec::new();
        for score in &self.scores {
            if score.dimension == dimension && self.idea_domain(&score.idea_id) == Some(domain) {
                units.insert(score.idea_id.clone());
                cells.push((
                    score.idea_id.clone(),
                    score.evaluator_id.clone(),
                    score.score,
                ));
            }
        }
        RatingMatrix::new(
            units.into_iter().collect(),
            raters,
            cells,
            dimension.value_domain(),
        )
    }

    /// An evaluator's `idea -> score` map for one dimension, optionally
    /// restricted to a domain.
    pub fn score_map(
        &self,
        evaluator_id: &str,
        dimension: Dimension,
        domain: Option<Domain>,
    ) -> BTreeMap<String, i64> {
        self.scores_for_evaluator(evaluator_id, dimension)
            .filter(|r| match domain {
                Some(d) => self.idea_domain(&r.idea_id) == Some(d),
                None => true,
            })
            .map(|r| (r.idea_id.clone(), r.score))
            .collect()
    }
}

/// Deterministic equality over record contents (indexes and warnings are
/// derived data).
impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        fn sorted<T: Clone, K: Ord, F: Fn(&T) -> K>(items: &[T], key: F) -> Vec<T> {
            let mut v = items.to_vec();
            v.sort_by_key(|x| key(x));
            v
        }
        sorted(&self.patents, |p: &Patent| p.patent_id.clone())
            == sorted(&other.patents, |p: &Patent| p.patent_id.clone())
            && sorted(&self.ideas, |i: &Idea| i.idea_id.clone())
                == sorted(&other.ideas, |i: &Idea| i.idea_id.clone())
            && sorted(&self.evaluators, |e: &Evaluator| e.evaluator_id.clone())
                == sorted(&other.evaluators, |e: &Evaluator| e.evaluator_id.clone())
            && self.scores == other.scores
    }
}

/// Regular grid corpus for tests: every evaluator scores every idea on
/// specificity with score `1 + (evaluator index + idea index) mod 4`.
#[cfg(test)]
pub(crate) fn grid_corpus(
    n_evaluators: usize,
    n_patents: usize,
    ideas_per_patent: usize,
) -> Corpus {
    use crate::dataset::Background;

    let mut patents = Vec::new();
    let mut ideas = Vec::new();
    for p in 0..n_patents {
        patents.push(Patent {
            patent_id: format!("P{p}"),
            domain: Domain::Nlp,
            title: format!("patent {p}"),
            abstract_text: "text".into(),
            claims: vec!["claim".into()],
            description: String::new(),
        });
        for i in 0..ideas_per_patent {
            ideas.push(Idea {
                idea_id: format!("P{p}-I{i}"),
                patent_id: format!("P{p}"),
                system_id: "sys".into(),
                title: format!("idea {p} {i}"),
                description: format!("description {p} {i}"),
                implementation: format!("implementation {p} {i}"),
                differentiation: format!("differentiation {p} {i}"),
            });
        }
    }
    let evaluators = (0..n_evaluators)
        .map(|e| Evaluator {
            evaluator_id: format!("E{e}"),
            domain: Domain::Nlp,
            background: Background::Technical,
        })
        .collect();
    let mut scores = Vec::new();
    for e in 0..n_evaluators {
        for (n, idea) in ideas.iter().enumerate() {
            scores.push(ScoreRecord {
                evaluator_id: format!("E{e}"),
                idea_id: idea.idea_id.clone(),
                dimension: Dimension::Specificity,
                score: 1 + ((e + n) % 4) as i64,
                reason: None,
            });
        }
    }
    Corpus::from_parts(patents, ideas, evaluators, scores).unwrap()
}

/// Small fully-valid corpus used across the crate's tests.
#[cfg(test)]
pub(crate) fn tiny_corpus() -> Corpus {
    use crate::dataset::Background;

    let patents = vec![
        Patent {
            patent_id: "P1".into(),
            domain: Domain::Nlp,
            title: "Streaming token alignment".into(),
            abstract_text: "Aligns token streams across noisy transcriptions.".into(),
            claims: vec!["A method for aligning tokens.".into()],
            description: String::new(),
        },
        Patent {
            patent_id: "P2".into(),
            domain: Domain::Nlp,
            title: "Incremental grammar induction".into(),
            abstract_text: "Learns grammar fragments incrementally.".into(),
            claims: vec!["A system for grammar induction.".into()],
            description: String::new(),
        },
    ];
    let ideas = vec![
        Idea {
            idea_id: "I1".into(),
            patent_id: "P1".into(),
            system_id: "sysA".into(),
            title: "Meeting transcript cleaner".into(),
            description: "Cleans noisy meeting transcripts for search.".into(),
            implementation: "Stream alignment over ASR output.".into(),
            differentiation: "Works online rather than in batch.".into(),
        },
        Idea {
            idea_id: "I2".into(),
            patent_id: "P2".into(),
            system_id: "sysA".into(),
            title: "Contract clause extractor".into(),
            description: "Extracts clause structures from contracts.".into(),
            implementation: "Grammar induction over legal text.".into(),
            differentiation: "No labeled data required.".into(),
        },
        Idea {
            idea_id: "I3".into(),
            patent_id: "P2".into(),
            system_id: "sysB".into(),
            title: "Support macro suggester".into(),
            description: "Suggests reply macros from ticket history.".into(),
            implementation: "Induced templates ranked by usage.".into(),
            differentiation: "Template induction instead of retrieval.".into(),
        },
    ];
    let evaluators = vec![
        Evaluator {
            evaluator_id: "E1".into(),
            domain: Domain::Nlp,
            background: Background::Technical,
        },
        Evaluator {
            evaluator_id: "E2".into(),
            domain: Domain::Nlp,
            background: Background::Business,
        },
    ];
    let scores = vec![
        ScoreRecord {
            evaluator_id: "E1".into(),
            idea_id: "I1".into(),
            dimension: Dimension::Specificity,
            score: 4,
            reason: None,
        },
        ScoreRecord {
            evaluator_id: "E1".into(),
            idea_id: "I1".into(),
            dimension: Dimension::TechnicalValidity,
            score: 3,
            reason: None,
        },
        ScoreRecord {
            evaluator_id: "E1".into(),
            idea_id: "I2".into(),
            dimension: Dimension::Specificity,
            score: 2,
            reason: None,
        },
        ScoreRecord {
            evaluator_id: "E2".into(),
            idea_id: "I1".into(),
            dimension: Dimension::Specificity,
            score: 3,
            reason: Some("clear enough".into()),
        },
        ScoreRecord {
            evaluator_id: "E2".into(),
            idea_id: "I3".into(),
            dimension: Dimension::Specificity,
            score: 3,
            reason: None,
        },
    ];
    Corpus::from_parts(patents, ideas, evaluators, scores).unwrap()
}
