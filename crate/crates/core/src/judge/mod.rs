//! The automated judge: prompt assembly, pluggable backends, output
//! parsing, confidence filtering, multi-seed voting, and run artifacts.

mod backend;
mod cache;
mod parse;
mod prompt;
mod runner;

pub use backend::{
    mock_predict, BackendConfig, CachingBackend, HttpChatBackend, HttpChatConfig, JudgeBackend,
    MockKnnBackend, ReplayBackend,
};
pub use cache::{cache_key, CacheRecord, ResponseCache};
pub use parse::{parse_prediction, ParsedPrediction};
pub use prompt::{render_prompt, PromptBundle, RenderConfig, RenderedExample};
pub use runner::{
    confidence_filter, default_confidence_threshold, majority_vote, run_condition,
    run_condition_with, ArtifactHeader, FilterOutcome, JudgePrediction, RunArtifact, RunConfig,
    RunOutcome, TargetSkip,
};
