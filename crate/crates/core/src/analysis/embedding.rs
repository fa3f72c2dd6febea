//! Text embeddings for the reasoning-similarity study.
//!
//! The default backend hashes tokens into a fixed-dimension bag vector so the
//! whole study runs offline and deterministically; an HTTP backend covers
//! real embedding services. Identical text always embeds to an identical
//! vector.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait EmbeddingBackend: Send + Sync {
    /// Stable identifier recorded in report metadata.
    fn id(&self) -> String;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>>;
}

/// Mean of several embeddings; `None` when `texts` is empty.
pub fn mean_embedding(backend: &dyn EmbeddingBackend, texts: &[&str]) -> Result<Option<Vec<f64>>> {
    if texts.is_empty() {
        return Ok(None);
    }
    let mut sum = vec![0.0; backend.dimension()];
    for text in texts {
        let v = backend.embed(text)?;
        for (s, x) in sum.iter_mut().zip(&v) {
            *s += x;
        }
    }
    let n = texts.len() as f64;
    for s in &mut sum {
        *s /= n;
    }
    Ok(Some(sum))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub const DEFAULT_EMBEDDING_DIMENSION: usize = 256;

/// Token-count bag vector: each lowercase alphanumeric token is hashed
/// (FNV-1a, fixed constants, no per-process state) into one of `dimension`
/// buckets, then the vector is L2-normalized. Empty text embeds to the zero
/// vector; cosine against it fails downstream rather than here.
#[derive(Debug, Clone)]
pub struct HashEmbedding {
    dimension: usize,
}

impl HashEmbedding {
    pub fn new(dimension: usize) -> HashEmbedding {
        assert!(dimension > 0, "embedding dimension must be positive");
        HashEmbedding { dimension }
    }
}

impl Default for HashEmbedding {
    fn default() -> Self {
        HashEmbedding::new(DEFAULT_EMBEDDING_DIMENSION)
    }
}

impl EmbeddingBackend for HashEmbedding {
    fn id(&self) -> String {
        format!("deterministic_hash:{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let mut counts = vec![0.0f64; self.dimension];
        for token in text
            .to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            let bucket = (fnv1a64(token.as_bytes()) % self.dimension as u64) as usize;
            counts[bucket] += 1.0;
        }
        let norm = counts.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut counts {
                *x /= norm;
            }
        }
        Ok(counts)
    }
}

fn default_embedding_dimension() -> usize {
    DEFAULT_EMBEDDING_DIMENSION
}

fn default_embedding_timeout() -> u64 {
    60
}

/// Connection settings for an OpenAI-style `/embeddings` endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpEmbeddingConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_embedding_dimension")]
    pub dimension: usize,
    #[serde(default = "default_embedding_timeout")]
    pub timeout_secs: u64,
    /// Environment variable holding the bearer token; unset means no auth
    /// header is sent.
    #[serde(default = "default_embedding_credential_env")]
    pub credential_env: String,
}

fn default_embedding_credential_env() -> String {
    "PLURIJUDGE_API_KEY".to_string()
}

pub struct HttpEmbedding {
    config: HttpEmbeddingConfig,
    agent: ureq::Agent,
}

impl HttpEmbedding {
    pub fn new(config: HttpEmbeddingConfig) -> HttpEmbedding {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        HttpEmbedding { config, agent }
    }
}

impl EmbeddingBackend for HttpEmbedding {
    fn id(&self) -> String {
        format!("http_embedding:{}", self.config.model)
    }

    fn dimension(&self) -> usize {
        self.config.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let body = serde_json::json!({ "model": self.config.model, "input": [text] });
        let mut request = self.agent.post(&self.config.endpoint);
        if let Ok(token) = std::env::var(&self.config.credential_env) {
            request = request.set("Authorization", &format!("Bearer {token}"));
        }
        let response = request
            .set("Content-Type", "application/json")
            .send_string(&body.to_string())
            .map_err(|e| Error::Transport {
                attempts: 1,
                message: e.to_string(),
            })?;
        let text = response.into_string().map_err(|e| Error::Transport {
            attempts: 1,
            message: format!("unreadable embedding response: {e}"),
        })?;
        let payload: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Transport {
                attempts: 1,
                message: format!("invalid embedding response: {e}"),
            })?;
        let vector = payload
            .pointer("/data/0/embedding")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::Transport {
                attempts: 1,
                message: "embedding response missing data[0].embedding".to_string(),
            })?;
        let out: Vec<f64> = vector.iter().filter_map(|x| x.as_f64()).collect();
        if out.len() != vector.len() || out.len() != self.config.dimension {
            return Err(Error::Transport {
                attempts: 1,
                message: format!(
                    "embedding has {} components, expected {}",
                    out.len(),
                    self.config.dimension
                ),
            });
        }
        Ok(out)
    }
}

/// Declarative embedding choice for configs and CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingConfig {
    DeterministicHash {
        #[serde(default = "default_embedding_dimension")]
        dimension: usize,
    },
    HttpEmbedding(HttpEmbeddingConfig),
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig::DeterministicHash {
            dimension: DEFAULT_EMBEDDING_DIMENSION,
        }
    }
}

impl EmbeddingConfig {
    pub fn build(&self) -> Box<dyn EmbeddingBackend> {
        match self {
            EmbeddingConfig::DeterministicHash { dimension } => {
                Box::new(HashEmbedding::new(*dimension))
            }
            EmbeddingConfig::HttpEmbedding(config) => Box::new(HttpEmbedding::new(config.clone())),
        }
    }
}
