//! Append-only response cache: line-delimited JSON records keyed by
//! backend id and prompt content hash.
//!
//! Reads are served from an in-memory map guarded by an RwLock; appends
//! take a single file mutex, so concurrent runners never interleave
//! half-written lines.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One cached completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub backend_id: String,
    pub raw: String,
    /// Unix seconds at insertion time. Never copied into run artifacts.
    pub timestamp: u64,
}

/// Cache key: backend id and the SHA-256 of the full prompt text.
pub fn cache_key(backend_id: &str, content_hash: &str) -> String {
    format!("{backend_id}:{content_hash}")
}

/// Durable map from cache key to raw completion.
#[derive(Debug)]
pub struct ResponseCache {
    path: PathBuf,
    map: RwLock<BTreeMap<String, CacheRecord>>,
    appender: Mutex<File>,
}

impl ResponseCache {
    /// Open (or create) the cache file and load every existing record.
    /// Later duplicates of a key win, matching append order.
    pub fn open(path: &Path) -> Result<ResponseCache> {
        let mut map = BTreeMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: CacheRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
                map.insert(record.key.clone(), record);
            }
        }
        let appender = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(ResponseCache {
            path: path.to_path_buf(),
            map: RwLock::new(map),
            appender: Mutex::new(appender),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, key: &str) -> Option<CacheRecord> {
        self.map
            .read()
            .expect("cache lock poisoned")
            .get(key)
            .cloned()
    }

    /// Insert and persist one completion. An existing key is left intact
    /// (first write wins once in memory).
    pub fn put(&self, backend_id: &str, key: &str, raw: &str) -> Result<()> {
        {
            let map = self.map.read().expect("cache lock poisoned");
            if map.contains_key(key) {
                return Ok(());
            }
        }
        let record = CacheRecord {
            key: key.to_string(),
            backend_id: backend_id.to_string(),
            raw: raw.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let line = serde_json::to_string(&record)
            .map_err(|e| Error::parse(&self.path, 0, e.to_string()))?;
        {
            let mut file = self.appender.lock().expect("cache appender poisoned");
            writeln!(file, "{line}").map_err(|e| Error::io(&self.path, e))?;
            file.flush().map_err(|e| Error::io(&self.path, e))?;
        }
        self.map
            .write()
            .expect("cache lock poisoned")
            .insert(record.key.clone(), record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
