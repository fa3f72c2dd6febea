//! Command-line front end: validate corpora, inspect coverage, run
//! conditioned judges, and emit the analysis reports as CSV + JSON.
//!
//! Every flag can also come from a JSON config file (`--config`); explicit
//! flags win over file values.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use plurijudge::agreement::{DistanceMetric, MedianStrictness};
use plurijudge::analysis::{
    alignment_curve_table, alignment_point_from_artifact, alignment_study, coarse_judge_report,
    disagreement_report, reasoning_points_table, reasoning_similarity_study,
    reasoning_summary_table, AlignmentStudyConfig, DisagreementConfig, EmbeddingConfig,
    ReportTable, DEFAULT_MIN_OVERLAP,
};
use plurijudge::conditioning::Condition;
use plurijudge::dataset::{validate_screening, Corpus, Dimension, Domain, RubricSet};
use plurijudge::judge::{run_condition, BackendConfig, RenderConfig, RunArtifact, RunConfig};
use plurijudge::synth::{generate_corpus, spread_policies, SynthConfig};

#[derive(Parser)]
#[command(
    name = "plurijudge",
    version,
    about = "Agreement analysis and evaluator-conditioned judging over patent-grounded product ideas"
)]
struct Cli {
    /// JSON file whose keys mirror the long flag names; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check referential integrity and the staged screening protocol.
    Validate(CorpusArgs),
    /// Coverage counts per domain.
    Stats(ReportArgs),
    /// Fine-grained alpha next to coarse above-median agreement (one row
    /// per dimension and domain).
    Disagreement(DisagreementArgs),
    /// Judge one (dimension, domain, condition, shots) slice and persist
    /// the run artifact.
    RunJudge(RunJudgeArgs),
    /// Alignment curves: judge-vs-expert alpha against shot count.
    Align(AlignArgs),
    /// Above-median Jaccard and top-half overlap between judge and experts,
    /// from run artifacts.
    Coarse(ArtifactReportArgs),
    /// Correlation between pairwise expert agreement and judge reasoning
    /// similarity, from run artifacts.
    Reasoning(ReasoningArgs),
    /// Generate a synthetic corpus with heterogeneous evaluator policies.
    Synth(SynthArgs),
}

/// A config value that commands read as one item or as a sweep list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(value) => vec![value.clone()],
            OneOrMany::Many(values) => values.clone(),
        }
    }

    fn first(&self) -> Option<&T> {
        match self {
            OneOrMany::One(value) => Some(value),
            OneOrMany::Many(values) => values.first(),
        }
    }
}

/// Values a JSON config file may supply; keys mirror the long flags.
/// Sweepable keys take a single value or a list and accept plural aliases.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus_dir: Option<PathBuf>,
    out: Option<PathBuf>,
    #[serde(alias = "dimensions")]
    dimension: Option<OneOrMany<String>>,
    #[serde(alias = "domains")]
    domain: Option<OneOrMany<String>>,
    #[serde(alias = "conditions")]
    condition: Option<OneOrMany<String>>,
    #[serde(alias = "shot_list")]
    shots: Option<OneOrMany<usize>>,
    seeds: Option<Vec<u64>>,
    backend: Option<BackendConfig>,
    confidence_threshold: Option<i64>,
    metric: Option<String>,
    min_overlap: Option<usize>,
    artifact: Option<Vec<PathBuf>>,
    embedding: Option<EmbeddingConfig>,
    n_patents: Option<usize>,
    ideas_per_patent: Option<usize>,
    n_evaluators: Option<usize>,
    offset_spread: Option<f64>,
    noise_scale: Option<f64>,
    seed: Option<u64>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Args)]
struct CorpusArgs {
    /// Directory holding patents/ideas/evaluators/scores .jsonl files.
    #[arg(long, value_name = "DIR")]
    corpus_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Directory reports are written into.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DisagreementArgs {
    #[command(flatten)]
    report: ReportArgs,
    /// Distance metric for alpha: nominal | ordinal | interval.
    #[arg(long)]
    metric: Option<String>,
    /// Minimum shared scored items for an evaluator pair to count.
    #[arg(long)]
    min_overlap: Option<usize>,
}

#[derive(Args)]
struct JudgeArgs {
    /// Judge backend: mock_knn, or a path to a backend JSON file.
    #[arg(long)]
    backend: Option<String>,
    /// Predictions below this self-reported confidence are discarded.
    #[arg(long)]
    confidence_threshold: Option<i64>,
    /// Run seeds; one prediction per seed feeds the vote.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

#[derive(Args)]
struct RunJudgeArgs {
    #[command(flatten)]
    report: ReportArgs,
    /// Scoring dimension (e.g. specificity).
    #[arg(long)]
    dimension: Option<String>,
    /// Domain slice: NLP | CS | MatChem.
    #[arg(long)]
    domain: Option<String>,
    #[command(flatten)]
    judge: JudgeArgs,
    /// Conditioning regime: zero_shot | aggregate | personalized.
    #[arg(long)]
    condition: Option<String>,
    /// Examples per conditioning set.
    #[arg(long)]
    shots: Option<usize>,
}

#[derive(Args)]
struct AlignArgs {
    #[command(flatten)]
    report: ReportArgs,
    /// Scoring dimensions to sweep; repeatable.
    #[arg(long)]
    dimension: Vec<String>,
    /// Domains to sweep; repeatable.
    #[arg(long)]
    domain: Vec<String>,
    #[command(flatten)]
    judge: JudgeArgs,
    /// Conditions to sweep; repeatable. Defaults to all three.
    #[arg(long)]
    condition: Vec<String>,
    /// Shot counts to sweep for few-shot conditions; repeatable.
    #[arg(long)]
    shots: Vec<usize>,
    /// Distance metric for alpha.
    #[arg(long)]
    metric: Option<String>,
    /// Summarize existing run artifacts instead of running the judge.
    #[arg(long, value_name = "FILE")]
    artifact: Vec<PathBuf>,
}

#[derive(Args)]
struct ArtifactReportArgs {
    #[command(flatten)]
    report: ReportArgs,
    /// Run artifact produced by run-judge; repeatable.
    #[arg(long, value_name = "FILE")]
    artifact: Vec<PathBuf>,
}

#[derive(Args)]
struct ReasoningArgs {
    #[command(flatten)]
    artifacts: ArtifactReportArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory the four corpus .jsonl files are written into.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    n_patents: Option<usize>,
    #[arg(long)]
    ideas_per_patent: Option<usize>,
    #[arg(long)]
    n_evaluators: Option<usize>,
    /// Evaluator strictness offsets span [-spread/2, +spread/2].
    #[arg(long)]
    offset_spread: Option<f64>,
    /// Gaussian noise on every raw score.
    #[arg(long)]
    noise_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Domain label for the generated corpus.
    #[arg(long)]
    domain: Option<String>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Validate(args) => validate(&file, &args),
        Command::Stats(args) => stats(&file, &args),
        Command::Disagreement(args) => disagreement(&file, &args),
        Command::RunJudge(args) => run_judge(&file, &args),
        Command::Align(args) => align(&file, &args),
        Command::Coarse(args) => coarse(&file, &args),
        Command::Reasoning(args) => reasoning(&file, &args),
        Command::Synth(args) => synth(&file, &args),
    }
}

fn corpus_dir(file: &FileConfig, flag: &Option<PathBuf>) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| file.corpus_dir.clone())
        .context("--corpus-dir is required (flag or config file)")
}

fn load_corpus(file: &FileConfig, flag: &Option<PathBuf>) -> Result<Corpus> {
    let dir = corpus_dir(file, flag)?;
    let corpus =
        Corpus::load_dir(&dir).with_context(|| format!("loading corpus from {}", dir.display()))?;
    for warning in corpus.warnings() {
        log::warn!("{warning}");
    }
    Ok(corpus)
}

fn out_dir(file: &FileConfig, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn parse_dimension(file: &FileConfig, flag: &Option<String>) -> Result<Dimension> {
    let name = flag
        .clone()
        .or_else(|| file.dimension.as_ref().and_then(|d| d.first().cloned()))
        .context("--dimension is required (flag or config file)")?;
    Ok(Dimension::from_str(&name)?)
}

fn parse_domain(file: &FileConfig, flag: &Option<String>) -> Result<Domain> {
    let name = flag
        .clone()
        .or_else(|| file.domain.as_ref().and_then(|d| d.first().cloned()))
        .context("--domain is required (flag or config file)")?;
    Ok(Domain::from_str(&name)?)
}

fn parse_dimensions(file: &FileConfig, flag: &[String]) -> Result<Vec<Dimension>> {
    let names: Vec<String> = if !flag.is_empty() {
        flag.to_vec()
    } else {
        file.dimension
            .as_ref()
            .map(OneOrMany::to_vec)
            .unwrap_or_default()
    };
    if names.is_empty() {
        bail!("at least one --dimension is required (flag or config file)");
    }
    names.iter().map(|n| Ok(Dimension::from_str(n)?)).collect()
}

fn parse_domains(file: &FileConfig, flag: &[String]) -> Result<Vec<Domain>> {
    let names: Vec<String> = if !flag.is_empty() {
        flag.to_vec()
    } else {
        file.domain
            .as_ref()
            .map(OneOrMany::to_vec)
            .unwrap_or_default()
    };
    if names.is_empty() {
        bail!("at least one --domain is required (flag or config file)");
    }
    names.iter().map(|n| Ok(Domain::from_str(n)?)).collect()
}

fn parse_metric(file: &FileConfig, flag: &Option<String>) -> Result<DistanceMetric> {
    match flag.clone().or_else(|| file.metric.clone()) {
        Some(name) => Ok(DistanceMetric::from_str(&name)?),
        None => Ok(DistanceMetric::Ordinal),
    }
}

fn parse_backend(file: &FileConfig, flag: &Option<String>) -> Result<BackendConfig> {
    let Some(value) = flag else {
        return Ok(file.backend.clone().unwrap_or_default());
    };
    match value.as_str() {
        "mock_knn" => Ok(BackendConfig::MockKnn),
        path if Path::new(path).exists() => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading backend config {path}"))?;
            serde_json::from_str(&text).with_context(|| format!("parsing backend config {path}"))
        }
        other => bail!(
            "unknown backend {other:?}: pass mock_knn or a path to a JSON file \
             describing a replay or http_chat backend"
        ),
    }
}

fn seeds(file: &FileConfig, flag: &[u64]) -> Vec<u64> {
    if !flag.is_empty() {
        flag.to_vec()
    } else {
        file.seeds.clone().unwrap_or_else(|| vec![1, 2, 3])
    }
}

fn conditions(file: &FileConfig, flag: &[String]) -> Result<Vec<Condition>> {
    let names: Vec<String> = if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(from_file) = &file.condition {
        from_file.to_vec()
    } else {
        return Ok(Condition::ALL.to_vec());
    };
    names.iter().map(|n| Ok(Condition::from_str(n)?)).collect()
}

fn artifact_paths(file: &FileConfig, flag: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let paths = if !flag.is_empty() {
        flag.to_vec()
    } else {
        file.artifact.clone().unwrap_or_default()
    };
    if paths.is_empty() {
        bail!("at least one --artifact is required (flag or config file)");
    }
    Ok(paths)
}

fn read_artifacts(paths: &[PathBuf]) -> Result<Vec<RunArtifact>> {
    paths
        .iter()
        .map(|p| RunArtifact::read(p).with_context(|| format!("reading artifact {}", p.display())))
        .collect()
}

/// Write both renderings and echo the CSV so pipelines can scrape stdout.
fn emit(table: &ReportTable, dir: &Path, basename: &str) -> Result<()> {
    let (csv_path, json_path) = table.write(dir, basename)?;
    print!("{}", table.to_csv());
    eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn validate(file: &FileConfig, args: &CorpusArgs) -> Result<()> {
    let corpus = load_corpus(file, &args.corpus_dir)?;
    let violations = validate_screening(&corpus);
    for violation in &violations {
        println!("{violation}");
    }
    if !violations.is_empty() {
        bail!("{} screening violations", violations.len());
    }
    println!(
        "ok: {} patents, {} ideas, {} evaluators, {} scores, screening clean",
        corpus.patents().len(),
        corpus.ideas().len(),
        corpus.evaluators().len(),
        corpus.scores().len()
    );
    Ok(())
}

fn stats(file: &FileConfig, args: &ReportArgs) -> Result<()> {
    let corpus = load_corpus(file, &args.corpus.corpus_dir)?;
    let mut table = ReportTable::new(
        "corpus_coverage",
        &[
            "domain",
            "n_evaluators",
            "n_patents",
            "n_ideas",
            "n_annotations",
        ],
    );
    for row in corpus.coverage_stats() {
        table.push_row(vec![
            row.domain.into(),
            row.n_evaluators.into(),
            row.n_patents.into(),
            row.n_ideas.into(),
            row.n_annotations.into(),
        ]);
    }
    emit(&table, &out_dir(file, &args.out), "corpus_stats")
}

fn disagreement(file: &FileConfig, args: &DisagreementArgs) -> Result<()> {
    let corpus = load_corpus(file, &args.report.corpus.corpus_dir)?;
    let config = DisagreementConfig {
        metric: parse_metric(file, &args.metric)?,
        min_overlap: args
            .min_overlap
            .or(file.min_overlap)
            .unwrap_or(DEFAULT_MIN_OVERLAP),
        strictness: MedianStrictness::Strict,
    };
    let table = disagreement_report(&corpus, &config);
    emit(&table, &out_dir(file, &args.report.out), "disagreement")
}

fn run_config(file: &FileConfig, args: &RunJudgeArgs) -> Result<RunConfig> {
    let condition_name = args
        .condition
        .clone()
        .or_else(|| file.condition.as_ref().and_then(|c| c.first().cloned()))
        .context("--condition is required (flag or config file)")?;
    let condition = Condition::from_str(&condition_name)?;
    let shots = match args
        .shots
        .or_else(|| file.shots.as_ref().and_then(|s| s.first().copied()))
    {
        Some(shots) => shots,
        None if condition == Condition::ZeroShot => 0,
        None => bail!("--shots is required for few-shot conditions"),
    };
    Ok(RunConfig {
        dimension: parse_dimension(file, &args.dimension)?,
        domain: parse_domain(file, &args.domain)?,
        condition,
        shots,
        seeds: seeds(file, &args.judge.seeds),
        confidence_threshold: args
            .judge
            .confidence_threshold
            .or(file.confidence_threshold)
            .unwrap_or(80),
        backend: parse_backend(file, &args.judge.backend)?,
        render: RenderConfig::default(),
    })
}

fn run_judge(file: &FileConfig, args: &RunJudgeArgs) -> Result<()> {
    let corpus = load_corpus(file, &args.report.corpus.corpus_dir)?;
    let config = run_config(file, args)?;
    let outcome = run_condition(&corpus, &RubricSet::builtin(), &config)?;

    let dir = out_dir(file, &args.report.out);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let basename = format!(
        "run-{}-{}-{}-{}shot",
        config.dimension, config.domain, config.condition, config.shots
    );
    let artifact_path = dir.join(format!("{basename}.jsonl"));
    outcome.write_artifact(&artifact_path)?;
    eprintln!("wrote {}", artifact_path.display());

    let mut summary = ReportTable::new(
        "run_summary",
        &[
            "dimension",
            "domain",
            "condition",
            "shots",
            "n_targets_judged",
            "n_predictions",
            "n_skipped_targets",
            "discard_rate",
        ],
    );
    summary.note("artifact", artifact_path.display().to_string());
    summary.note("backend", outcome.config.backend.kind());
    summary.push_row(vec![
        config.dimension.as_str().into(),
        config.domain.as_str().into(),
        config.condition.as_str().into(),
        config.shots.into(),
        outcome.finals.len().into(),
        outcome.predictions.len().into(),
        outcome.skips.len().into(),
        outcome.discard_rate.into(),
    ]);
    for skip in &outcome.skips {
        log::warn!(
            "skipped {}/{}: {}",
            skip.evaluator_id,
            skip.idea_id,
            skip.reason
        );
    }
    emit(&summary, &dir, &format!("{basename}-summary"))
}

fn align(file: &FileConfig, args: &AlignArgs) -> Result<()> {
    let corpus = load_corpus(file, &args.report.corpus.corpus_dir)?;
    let metric = parse_metric(file, &args.metric)?;
    let dir = out_dir(file, &args.report.out);

    let points = if !args.artifact.is_empty() || file.artifact.is_some() {
        let artifacts = read_artifacts(&artifact_paths(file, &args.artifact)?)?;
        artifacts
            .iter()
            .map(|a| alignment_point_from_artifact(&corpus, a, metric))
            .collect()
    } else {
        let shot_list = if !args.shots.is_empty() {
            args.shots.clone()
        } else {
            file.shots
                .as_ref()
                .map(OneOrMany::to_vec)
                .unwrap_or_else(|| vec![1, 3, 5, 7, 9])
        };
        let config = AlignmentStudyConfig {
            dimensions: parse_dimensions(file, &args.dimension)?,
            domains: parse_domains(file, &args.domain)?,
            conditions: conditions(file, &args.condition)?,
            shot_list,
            seeds: seeds(file, &args.judge.seeds),
            confidence_threshold: args
                .judge
                .confidence_threshold
                .or(file.confidence_threshold)
                .unwrap_or(80),
            backend: parse_backend(file, &args.judge.backend)?,
            render: RenderConfig::default(),
            metric,
        };
        alignment_study(&corpus, &RubricSet::builtin(), &config)?
    };
    let table = alignment_curve_table(&points, metric);
    emit(&table, &dir, "alignment_curve")
}

fn coarse(file: &FileConfig, args: &ArtifactReportArgs) -> Result<()> {
    let corpus = load_corpus(file, &args.report.corpus.corpus_dir)?;
    let artifacts = read_artifacts(&artifact_paths(file, &args.artifact)?)?;
    let table = coarse_judge_report(&corpus, &artifacts, MedianStrictness::Strict);
    emit(&table, &out_dir(file, &args.report.out), "coarse_judge")
}

fn reasoning(file: &FileConfig, args: &ReasoningArgs) -> Result<()> {
    let corpus = load_corpus(file, &args.artifacts.report.corpus.corpus_dir)?;
    let artifacts = read_artifacts(&artifact_paths(file, &args.artifacts.artifact)?)?;
    let embedding = file.embedding.clone().unwrap_or_default().build();
    let studies: Vec<_> = artifacts
        .iter()
        .map(|artifact| {
            reasoning_similarity_study(
                &corpus,
                &artifact.header.config,
                &artifact.predictions,
                embedding.as_ref(),
            )
        })
        .collect::<plurijudge::Result<_>>()?;
    let dir = out_dir(file, &args.artifacts.report.out);
    emit(
        &reasoning_summary_table(&studies),
        &dir,
        "reasoning_summary",
    )?;
    emit(&reasoning_points_table(&studies), &dir, "reasoning_points")
}

fn synth(file: &FileConfig, args: &SynthArgs) -> Result<()> {
    let policies = spread_policies(
        args.n_evaluators.or(file.n_evaluators).unwrap_or(6),
        args.offset_spread.or(file.offset_spread).unwrap_or(2.4),
        args.noise_scale.or(file.noise_scale).unwrap_or(0.25),
    );
    let mut config = SynthConfig::new(
        args.n_patents.or(file.n_patents).unwrap_or(14),
        args.ideas_per_patent.or(file.ideas_per_patent).unwrap_or(3),
        policies,
        args.seed.or(file.seed).unwrap_or(7),
    );
    if let Some(name) = args
        .domain
        .clone()
        .or_else(|| file.domain.as_ref().and_then(|d| d.first().cloned()))
    {
        config.domain = Domain::from_str(&name)?;
    }
    let corpus = generate_corpus(&config)?;
    let dir = out_dir(file, &args.out);
    corpus.save_dir(&dir)?;
    println!(
        "wrote synthetic corpus to {}: {} patents, {} ideas, {} evaluators, {} scores",
        dir.display(),
        corpus.patents().len(),
        corpus.ideas().len(),
        corpus.evaluators().len(),
        corpus.scores().len()
    );
    Ok(())
}
