//! Judge backends: a deterministic offline mock, a cache replayer, and an
//! HTTP chat client, plus a caching wrapper.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::judge::cache::{cache_key, ResponseCache};
use crate::judge::prompt::PromptBundle;

/// A judge that turns a rendered prompt into raw completion text.
/// Implementations must be safe for concurrent in-flight requests.
pub trait JudgeBackend: Send + Sync {
    /// Stable identifier recorded in predictions and cache entries.
    fn id(&self) -> &str;
    fn invoke(&self, bundle: &PromptBundle) -> Result<String>;
}

/// Lowercased alphanumeric token set.
fn tokens(text: &str) -> BTreeSet<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn token_jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn snippet(text: &str) -> String {
    text.chars().take(60).collect()
}

/// Deterministic nearest-neighbor prediction over the conditioning
/// examples carried by the bundle.
///
/// The score is the score of the example whose idea text has the highest
/// token-set Jaccard similarity to the target idea text (earliest example
/// wins ties). With no examples the score falls back to the scale
/// midpoint, rounded down. Confidence is fixed at 95.
pub fn mock_predict(bundle: &PromptBundle) -> String {
    let (score, reason) = match nearest_example(bundle) {
        Some(example) => (
            example.score,
            format!(
                "most similar prior idea {} was scored {}: {}",
                example.idea_id,
                example.score,
                snippet(&example.idea_text)
            ),
        ),
        None => {
            let (min, max) = bundle.dimension.scale();
            (
                (min + max).div_euclid(2),
                "no examples provided; defaulted to the scale midpoint".to_string(),
            )
        }
    };
    serde_json::json!({
        "score": score,
        "reason": reason,
        "confidence": 95,
    })
    .to_string()
}

fn nearest_example(bundle: &PromptBundle) -> Option<&crate::judge::prompt::RenderedExample> {
    let target = tokens(&bundle.target_idea_text);
    let mut best: Option<(f64, &crate::judge::prompt::RenderedExample)> = None;
    for example in &bundle.examples {
        let similarity = token_jaccard(&target, &tokens(&example.idea_text));
        // Strict comparison keeps the earliest example on ties.
        if best.is_none_or(|(s, _)| similarity > s) {
            best = Some((similarity, example));
        }
    }
    best.map(|(_, example)| example)
}

/// Offline deterministic backend.
#[derive(Debug, Default)]
pub struct MockKnnBackend;

impl JudgeBackend for MockKnnBackend {
    fn id(&self) -> &str {
        "mock_knn"
    }

    fn invoke(&self, bundle: &PromptBundle) -> Result<String> {
        Ok(mock_predict(bundle))
    }
}

/// Serves completions recorded by an earlier run. Its id is the source
/// backend's id so replayed artifacts match the originals byte for byte.
pub struct ReplayBackend {
    cache: Arc<ResponseCache>,
    source_backend_id: String,
}

impl ReplayBackend {
    pub fn new(cache: Arc<ResponseCache>, source_backend_id: &str) -> Result<ReplayBackend> {
        if cache.is_empty() {
            return Err(Error::Config(format!(
                "replay backend requires a populated cache, but {} is empty",
                cache.path().display()
            )));
        }
        Ok(ReplayBackend {
            cache,
            source_backend_id: source_backend_id.to_string(),
        })
    }
}

impl JudgeBackend for ReplayBackend {
    fn id(&self) -> &str {
        &self.source_backend_id
    }

    fn invoke(&self, bundle: &PromptBundle) -> Result<String> {
        let key = cache_key(&self.source_backend_id, &bundle.content_hash());
        self.cache
            .get(&key)
            .map(|record| record.raw)
            .ok_or(Error::ReplayMiss { key })
    }
}

/// OpenAI-style chat endpoint settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpChatConfig {
    /// Full URL of the chat completions endpoint.
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    /// Environment variable holding the bearer credential. Requests go out
    /// unauthenticated when the variable is unset.
    #[serde(default = "default_credential_env")]
    pub credential_env: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Total attempt budget per request.
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Base delay; doubles after each failed attempt.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

fn default_credential_env() -> String {
    "PLURIJUDGE_API_KEY".to_string()
}

fn default_timeout_secs() -> u64 {
    60
}

fn default_max_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    250
}

/// HTTP chat backend with bounded exponential-backoff retries. Timeouts,
/// exhausted retries, and hard HTTP failures are reported distinctly.
pub struct HttpChatBackend {
    config: HttpChatConfig,
    id: String,
    agent: ureq::Agent,
}

impl HttpChatBackend {
    pub fn new(config: HttpChatConfig) -> HttpChatBackend {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        HttpChatBackend {
            id: format!("http_chat:{}", config.model),
            config,
            agent,
        }
    }

    fn post_once(&self, body: &str) -> std::result::Result<String, PostFailure> {
        let mut request = self
            .agent
            .post(&self.config.endpoint)
            .set("Content-Type", "application/json");
        if let Ok(token) = std::env::var(&self.config.credential_env) {
            request = request.set("Authorization", &format!("Bearer {token}"));
        }
        match request.send_string(body) {
            Ok(response) => response.into_string().map_err(|e| PostFailure::Transport {
                timeout: matches!(
                    e.kind(),
                    std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
                ),
                message: e.to_string(),
            }),
            Err(ureq::Error::Status(code, _)) => Err(PostFailure::Status(code)),
            Err(ureq::Error::Transport(transport)) => Err(PostFailure::Transport {
                timeout: is_timeout(&transport),
                message: transport.to_string(),
            }),
        }
    }

    /// First choice's text from a chat or completion style response body.
    fn extract_completion(&self, body: &str, attempts: u32) -> Result<String> {
        let value: serde_json::Value =
            serde_json::from_str(body).map_err(|e| Error::Transport {
                attempts,
                message: format!("unparseable response body: {e}"),
            })?;
        let choice =
            value
                .get("choices")
                .and_then(|c| c.get(0))
                .ok_or_else(|| Error::Transport {
                    attempts,
                    message: "response has no choices".to_string(),
                })?;
        choice
            .pointer("/message/content")
            .or_else(|| choice.get("text"))
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| Error::Transport {
                attempts,
                message: "choice carries no text".to_string(),
            })
    }
}

/// Why one HTTP attempt failed.
enum PostFailure {
    Status(u16),
    Transport { timeout: bool, message: String },
}

fn is_timeout(transport: &ureq::Transport) -> bool {
    matches!(transport.kind(), ureq::ErrorKind::Io) && {
        let text = transport.to_string().to_lowercase();
        text.contains("timed out") || text.contains("timeout")
    }
}

impl JudgeBackend for HttpChatBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn invoke(&self, bundle: &PromptBundle) -> Result<String> {
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": bundle.full_text()}],
            "temperature": self.config.temperature,
        })
        .to_string();

        let budget = self.config.max_retries.max(1);
        let mut last_timeout = false;
        let mut last_message = String::new();
        for attempt in 1..=budget {
            match self.post_once(&body) {
                Ok(response_body) => return self.extract_completion(&response_body, attempt),
                Err(PostFailure::Status(code)) if code == 429 || code >= 500 => {
                    last_timeout = false;
                    last_message = format!("HTTP status {code}");
                }
                Err(PostFailure::Status(code)) => {
                    return Err(Error::Transport {
                        attempts: attempt,
                        message: format!("HTTP status {code} (not retryable)"),
                    });
                }
                Err(PostFailure::Transport { timeout, message }) => {
                    last_timeout = timeout;
                    last_message = message;
                }
            }
            if attempt < budget {
                let backoff = self.config.backoff_ms.saturating_mul(1 << (attempt - 1));
                std::thread::sleep(Duration::from_millis(backoff));
            }
        }
        if last_timeout {
            Err(Error::Timeout { attempts: budget })
        } else {
            Err(Error::Transport {
                attempts: budget,
                message: last_message,
            })
        }
    }
}

/// Wraps a backend with read-through caching keyed by prompt content.
pub struct CachingBackend {
    inner: Box<dyn JudgeBackend>,
    cache: Arc<ResponseCache>,
}

impl CachingBackend {
    pub fn new(inner: Box<dyn JudgeBackend>, cache: Arc<ResponseCache>) -> CachingBackend {
        CachingBackend { inner, cache }
    }
}

impl JudgeBackend for CachingBackend {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn invoke(&self, bundle: &PromptBundle) -> Result<String> {
        let key = cache_key(self.inner.id(), &bundle.content_hash());
        if let Some(record) = self.cache.get(&key) {
            return Ok(record.raw);
        }
        let raw = self.inner.invoke(bundle)?;
        self.cache.put(self.inner.id(), &key, &raw)?;
        Ok(raw)
    }
}

/// Declarative backend selection, mirrored by the CLI config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    #[default]
    MockKnn,
    Replay {
        cache_path: PathBuf,
        /// Backend id the cached completions were recorded under.
        source_backend_id: String,
    },
    HttpChat {
        #[serde(flatten)]
        http: HttpChatConfig,
        /// Completions are cached here when set.
        cache_path: Option<PathBuf>,
    },
}

impl BackendConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            BackendConfig::MockKnn => "mock_knn",
            BackendConfig::Replay { .. } => "replay",
            BackendConfig::HttpChat { .. } => "http_chat",
        }
    }

    /// Instantiate the configured backend.
    pub fn build(&self) -> Result<Box<dyn JudgeBackend>> {
        match self {
            BackendConfig::MockKnn => Ok(Box::new(MockKnnBackend)),
            BackendConfig::Replay {
                cache_path,
                source_backend_id,
            } => {
                let cache = Arc::new(ResponseCache::open(cache_path)?);
                Ok(Box::new(ReplayBackend::new(cache, source_backend_id)?))
            }
            BackendConfig::HttpChat { http, cache_path } => {
                let backend = Box::new(HttpChatBackend::new(http.clone()));
                match cache_path {
                    Some(path) => {
                        let cache = Arc::new(ResponseCache::open(path)?);
                        Ok(Box::new(CachingBackend::new(backend, cache)))
                    }
                    None => Ok(backend),
                }
            }
        }
    }
}
