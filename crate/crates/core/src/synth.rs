//! Synthetic corpus generator: heterogeneous but internally consistent
//! evaluators scoring template-generated ideas.
//!
//! Each idea carries a latent quality per dimension. An evaluator's score is
//! a clamped, rounded linear function of that quality plus a per-evaluator
//! strictness offset, an optional per-dimension threshold shift, and Gaussian
//! noise. Scores are then filtered through the staged screening gates, so the
//! emitted corpus always passes `validate_screening`. Idea texts embed
//! quality-band tokens so lexical similarity between ideas correlates with
//! latent quality.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Background, Corpus, Dimension, Domain, Evaluator, Idea, Patent, ScoreRecord};
use crate::error::{Error, Result};

/// How one synthetic evaluator turns latent quality into scores.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatorPolicy {
    pub evaluator_id: String,
    /// Added to every raw score before rounding; positive is lenient.
    pub strictness_offset: f64,
    /// Standard deviation of the Gaussian noise term; must be ≥ 0.
    pub noise_scale: f64,
    /// Extra per-dimension offset on top of the global one.
    pub threshold_shifts: BTreeMap<Dimension, f64>,
}

impl EvaluatorPolicy {
    pub fn new(evaluator_id: impl Into<String>, strictness_offset: f64, noise_scale: f64) -> Self {
        EvaluatorPolicy {
            evaluator_id: evaluator_id.into(),
            strictness_offset,
            noise_scale,
            threshold_shifts: BTreeMap::new(),
        }
    }

    pub fn with_shift(mut self, dimension: Dimension, shift: f64) -> Self {
        self.threshold_shifts.insert(dimension, shift);
        self
    }

    fn shift(&self, dimension: Dimension) -> f64 {
        self.threshold_shifts
            .get(&dimension)
            .copied()
            .unwrap_or(0.0)
    }
}

/// Ground truth behind one generated idea.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentIdea {
    pub idea_id: String,
    pub patent_id: String,
    pub latent_quality: BTreeMap<Dimension, f64>,
}

/// Parameters for one generated corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_patents: usize,
    pub ideas_per_patent: usize,
    pub policies: Vec<EvaluatorPolicy>,
    pub seed: u64,
    pub domain: Domain,
}

impl SynthConfig {
    pub fn new(
        n_patents: usize,
        ideas_per_patent: usize,
        policies: Vec<EvaluatorPolicy>,
        seed: u64,
    ) -> Self {
        SynthConfig {
            n_patents,
            ideas_per_patent,
            policies,
            seed,
            domain: Domain::Nlp,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_patents == 0 {
            return Err(Error::Config("n_patents must be at least 1".into()));
        }
        if self.ideas_per_patent == 0 {
            return Err(Error::Config("ideas_per_patent must be at least 1".into()));
        }
        if self.policies.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 evaluator policies, got {}",
                self.policies.len()
            )));
        }
        for policy in &self.policies {
            if !(policy.noise_scale >= 0.0 && policy.noise_scale.is_finite()) {
                return Err(Error::Config(format!(
                    "evaluator {} has invalid noise_scale {}",
                    policy.evaluator_id, policy.noise_scale
                )));
            }
        }
        Ok(())
    }
}

/// Evenly spaced strictness offsets spanning `[-offset_spread/2, +offset_spread/2]`,
/// all with the same noise scale. A spread of 0 gives identical evaluators.
pub fn spread_policies(
    n_evaluators: usize,
    offset_spread: f64,
    noise_scale: f64,
) -> Vec<EvaluatorPolicy> {
    (0..n_evaluators)
        .map(|i| {
            let frac = if n_evaluators > 1 {
                i as f64 / (n_evaluators - 1) as f64
            } else {
                0.5
            };
            let offset = (frac - 0.5) * offset_spread;
            EvaluatorPolicy::new(format!("SE{:02}", i + 1), offset, noise_scale)
        })
        .collect()
}

/// A generated corpus together with the latent state it was scored from.
#[derive(Debug, Clone)]
pub struct SynthCohort {
    pub corpus: Corpus,
    pub latents: Vec<LatentIdea>,
}

/// Number of fine quality bands encoded into idea texts.
const FINE_BANDS: u32 = 6;
const COARSE_BANDS: u32 = 3;

fn band(quality: f64, bands: u32) -> u32 {
    ((quality * bands as f64) as u32).min(bands - 1)
}

fn dimension_token(dimension: Dimension) -> &'static str {
    match dimension {
        Dimension::Specificity => "spec",
        Dimension::TechnicalValidity => "tech",
        Dimension::Innovativeness => "innov",
        Dimension::CompetitiveAdvantage => "edge",
        Dimension::NeedValidity => "need",
        Dimension::MarketSize => "market",
    }
}

/// Idea text templates. Quality-band tokens (`specgrade3`, `techband1`, ...)
/// are single alphanumeric words so the lexical tokenizer keeps them intact,
/// making token overlap between two ideas track how close their latent
/// qualities are.
fn render_texts(latent: &LatentIdea, base_quality: f64) -> (String, String, String, String) {
    let mut fine = Vec::new();
    let mut coarse = Vec::new();
    for dimension in Dimension::ALL {
        let q = latent.latent_quality[&dimension];
        let name = dimension_token(dimension);
        fine.push(format!("{name}grade{}", band(q, FINE_BANDS)));
        coarse.push(format!("{name}band{}", band(q, COARSE_BANDS)));
    }
    let title = format!(
        "Concept {} derived from {}",
        latent.idea_id, latent.patent_id
    );
    let description = format!(
        "A product concept whose profile reads {} across the assessment axes, \
         with broader positioning {}.",
        fine.join(" "),
        coarse.join(" ")
    );
    let implementation = format!(
        "Delivery plan tier overallgrade{} overallband{}: staged rollout reusing \
         the patented mechanism with instrumentation for {}.",
        band(base_quality, 8),
        band(base_quality, COARSE_BANDS),
        fine.join(" ")
    );
    let differentiation = format!(
        "Positioned against incumbents at {} with defensibility markers {}.",
        coarse.join(" "),
        fine.join(" ")
    );
    (title, description, implementation, differentiation)
}

/// Generate a corpus plus the latent qualities behind it.
///
/// Per-dimension qualities are a shared per-idea base quality plus small
/// jitter, so text similarity (driven by the base) predicts every dimension.
pub fn generate_cohort(config: &SynthConfig) -> Result<SynthCohort> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut patents = Vec::new();
    let mut ideas = Vec::new();
    let mut latents = Vec::new();
    for p in 0..config.n_patents {
        let patent_id = format!("SP{:03}", p + 1);
        patents.push(Patent {
            patent_id: patent_id.clone(),
            domain: config.domain,
            title: format!("Synthetic patent {}", p + 1),
            abstract_text: format!(
                "Filing {patent_id} describes a configurable mechanism evaluated offline."
            ),
            claims: vec![format!("A mechanism as configured in filing {patent_id}.")],
            description: String::new(),
        });
        for i in 0..config.ideas_per_patent {
            let idea_id = format!("{patent_id}-I{}", i + 1);
            let base_quality: f64 = rng.gen();
            let mut latent_quality = BTreeMap::new();
            for dimension in Dimension::ALL {
                let jitter = rng.gen::<f64>() * 0.3 - 0.15;
                latent_quality.insert(dimension, (base_quality + jitter).clamp(0.0, 1.0));
            }
            let latent = LatentIdea {
                idea_id: idea_id.clone(),
                patent_id: patent_id.clone(),
                latent_quality,
            };
            let (title, description, implementation, differentiation) =
                render_texts(&latent, base_quality);
            ideas.push(Idea {
                idea_id,
                patent_id: patent_id.clone(),
                system_id: "synth".into(),
                title,
                description,
                implementation,
                differentiation,
            });
            latents.push(latent);
        }
    }

    let evaluators: Vec<Evaluator> = config
        .policies
        .iter()
        .map(|policy| Evaluator {
            evaluator_id: policy.evaluator_id.clone(),
            domain: config.domain,
            background: Background::Technical,
        })
        .collect();

    let mut scores = Vec::new();
    for policy in &config.policies {
        let noise = Normal::new(0.0, policy.noise_scale)
            .map_err(|e| Error::Config(format!("bad noise_scale: {e}")))?;
        for latent in &latents {
            let mut assigned: BTreeMap<Dimension, i64> = BTreeMap::new();
            // Dimension::ALL is in screening order, so gate scores are always
            // assigned before the dimensions they gate.
            for dimension in Dimension::ALL {
                let gates_pass = dimension
                    .gates()
                    .iter()
                    .all(|(gate, threshold)| assigned.get(gate).is_some_and(|s| s > threshold));
                if !gates_pass {
                    continue;
                }
                let (lo, hi) = dimension.scale();
                let raw = lo as f64
                    + latent.latent_quality[&dimension] * (hi - lo) as f64
                    + policy.strictness_offset
                    + policy.shift(dimension)
                    + noise.sample(&mut rng);
                let score = (raw.round() as i64).clamp(lo, hi);
                assigned.insert(dimension, score);
                scores.push(ScoreRecord {
                    evaluator_id: policy.evaluator_id.clone(),
                    idea_id: latent.idea_id.clone(),
                    dimension,
                    score,
                    reason: None,
                });
            }
        }
    }

    let corpus = Corpus::from_parts(patents, ideas, evaluators, scores)?;
    Ok(SynthCohort { corpus, latents })
}

/// Generate just the corpus; see [`generate_cohort`].
pub fn generate_corpus(config: &SynthConfig) -> Result<Corpus> {
    Ok(generate_cohort(config)?.corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agreement::{
        above_median_set, krippendorff_alpha, pairwise_jaccard, DistanceMetric, MedianStrictness,
        OwnerSelections,
    };
    use crate::dataset::validate_screening;

    fn quick_config(seed: u64, offset_spread: f64, noise_scale: f64) -> SynthConfig {
        SynthConfig::new(6, 4, spread_policies(4, offset_spread, noise_scale), seed)
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let policies = spread_policies(2, 1.0, 0.1);
        assert!(generate_corpus(&SynthConfig::new(0, 3, policies.clone(), 1)).is_err());
        assert!(generate_corpus(&SynthConfig::new(3, 0, policies.clone(), 1)).is_err());
        assert!(generate_corpus(&SynthConfig::new(3, 3, policies[..1].to_vec(), 1)).is_err());
        let mut bad = policies;
        bad[0].noise_scale = -0.5;
        assert!(generate_corpus(&SynthConfig::new(3, 3, bad, 1)).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let config = quick_config(7, 2.0, 0.3);
        let a = generate_corpus(&config).unwrap();
        let b = generate_corpus(&config).unwrap();
        assert_eq!(a, b);
        let c = generate_corpus(&quick_config(8, 2.0, 0.3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn screening_is_clean_by_construction() {
        for seed in 0..10 {
            let cohort = generate_cohort(&quick_config(seed, 3.0, 0.8)).unwrap();
            assert!(validate_screening(&cohort.corpus).is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn zero_noise_scores_are_monotone_in_quality() {
        let cohort = generate_cohort(&quick_config(11, 1.5, 0.0)).unwrap();
        for policy in spread_policies(4, 1.5, 0.0) {
            for dimension in Dimension::ALL {
                let mut scored: Vec<(f64, i64)> = cohort
                    .latents
                    .iter()
                    .filter_map(|l| {
                        cohort
                            .corpus
                            .score(&policy.evaluator_id, &l.idea_id, dimension)
                            .map(|s| (l.latent_quality[&dimension], s))
                    })
                    .collect();
                scored.sort_by(|a, b| a.0.total_cmp(&b.0));
                for pair in scored.windows(2) {
                    assert!(
                        pair[0].1 <= pair[1].1,
                        "{} {dimension}: quality {} scored {} but quality {} scored {}",
                        policy.evaluator_id,
                        pair[0].0,
                        pair[0].1,
                        pair[1].0,
                        pair[1].1
                    );
                }
            }
        }
    }

    #[test]
    fn identical_policies_reach_perfect_agreement() {
        let corpus = generate_corpus(&quick_config(3, 0.0, 0.0)).unwrap();
        for dimension in [Dimension::Specificity, Dimension::Innovativeness] {
            let matrix = corpus.rating_matrix(dimension, Domain::Nlp).unwrap();
            let report = krippendorff_alpha(&matrix, DistanceMetric::Ordinal).unwrap();
            if let Some(alpha) = report.alpha {
                assert_eq!(alpha, 1.0, "{dimension}");
            }
        }
    }

    #[test]
    fn opposed_offsets_shift_evaluator_means() {
        let policies = vec![
            EvaluatorPolicy::new("LOW", -1.0, 0.0),
            EvaluatorPolicy::new("HIGH", 1.0, 0.0),
        ];
        let corpus = generate_corpus(&SynthConfig::new(10, 4, policies, 5)).unwrap();
        // Specificity is ungated, so both evaluators score every idea and the
        // means are over the same set.
        let means = corpus.evaluator_means(Dimension::Specificity);
        let gap = means["HIGH"] - means["LOW"];
        assert!(
            gap > 1.0 && gap <= 2.0,
            "clamping shrinks the 2-point offset gap, got {gap}"
        );
    }

    #[test]
    fn wide_offsets_give_low_alpha_but_high_coarse_overlap() {
        let config = SynthConfig::new(16, 4, spread_policies(6, 2.5, 0.25), 17);
        let corpus = generate_corpus(&config).unwrap();
        // Ungated, so every pair shares all 64 scored ideas and the coarse
        // sets reflect offsets alone, not screening deletions.
        let dimension = Dimension::Specificity;

        let matrix = corpus.rating_matrix(dimension, Domain::Nlp).unwrap();
        let alpha = krippendorff_alpha(&matrix, DistanceMetric::Ordinal)
            .unwrap()
            .alpha
            .unwrap();

        let mut selections = Vec::new();
        for policy in &config.policies {
            let scored = corpus.score_map(&policy.evaluator_id, dimension, None);
            let selected =
                above_median_set(&policy.evaluator_id, &scored, MedianStrictness::Strict);
            selections.push(OwnerSelections::new(selected, scored.into_keys().collect()).unwrap());
        }
        let jaccard = pairwise_jaccard(&selections, 10).mean.unwrap();

        assert!(alpha < 0.45, "offsets should depress alpha, got {alpha}");
        assert!(
            jaccard > 0.6,
            "within-evaluator medians cancel offsets, got {jaccard}"
        );
        assert!(
            jaccard >= alpha + 0.25,
            "coarse overlap should clearly beat fine agreement: {jaccard} vs {alpha}"
        );
    }

    #[test]
    fn offset_spread_weakly_decreases_alpha() {
        let mean_alpha = |spread: f64| {
            let mut total = 0.0;
            for seed in 0..5 {
                let config = SynthConfig::new(8, 4, spread_policies(5, spread, 0.2), seed);
                let corpus = generate_corpus(&config).unwrap();
                let matrix = corpus
                    .rating_matrix(Dimension::Specificity, Domain::Nlp)
                    .unwrap();
                total += krippendorff_alpha(&matrix, DistanceMetric::Ordinal)
                    .unwrap()
                    .alpha
                    .unwrap();
            }
            total / 5.0
        };
        let tight = mean_alpha(0.0);
        let medium = mean_alpha(1.5);
        let wide = mean_alpha(3.0);
        assert!(tight >= medium - 1e-9, "tight {tight} vs medium {medium}");
        assert!(medium >= wide - 1e-9, "medium {medium} vs wide {wide}");
        assert!(tight > wide, "tight {tight} should beat wide {wide}");
    }

    #[test]
    fn emitted_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_corpus(&quick_config(2, 1.0, 0.2)).unwrap();
        corpus.save_dir(dir.path()).unwrap();
        let loaded = Corpus::load_dir(dir.path()).unwrap();
        assert_eq!(corpus, loaded);
    }
}
