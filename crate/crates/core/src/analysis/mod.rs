//! Study orchestration and report rendering: disagreement summaries,
//! judge-alignment curves, coarse judge metrics, and the reasoning
//! similarity correlation. Every report is a pure function of (corpus, run
//! artifacts, config); generating one never mutates an artifact.

mod alignment;
mod coarse;
mod disagreement;
mod embedding;
mod reasoning;
mod report;

pub use alignment::{
    alignment_curve_table, alignment_point, alignment_point_from_artifact, alignment_study,
    judge_expert_alpha, pooled_alignment_alpha, AlignmentPoint, AlignmentStudyConfig,
    EvaluatorAlignment,
};
pub use coarse::{coarse_judge_report, coarse_metrics, CoarseMetrics, EvaluatorCoarse};
pub use disagreement::{
    disagreement_cells, disagreement_report, DisagreementCell, DisagreementConfig,
    DEFAULT_MIN_OVERLAP,
};
pub use embedding::{
    mean_embedding, EmbeddingBackend, EmbeddingConfig, HashEmbedding, HttpEmbedding,
    HttpEmbeddingConfig, DEFAULT_EMBEDDING_DIMENSION,
};
pub use reasoning::{
    reasoning_points_table, reasoning_similarity_study, reasoning_summary_table, ReasoningPoint,
    ReasoningStudy, SkippedPair,
};
pub use report::{CellValue, ReportTable};
