//! Content-addressed response cache with an LRU bound, optionally backed by a
//! directory so entries survive restarts.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::AppError;
use crate::json::canonical_json;

/// 128-bit key, hex encoded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey(pub String);

impl CacheKey {
    /// Hash of the canonical form of the request's identifying parts.
    pub fn new(
        model_fingerprint: &str,
        explainer: &str,
        instance: &Value,
        config: &Value,
        seed: u64,
    ) -> Self {
        let doc = serde_json::json!({
            "model": model_fingerprint,
            "explainer": explainer,
            "instance": instance,
            "config": config,
            "seed": seed,
        });
        let digest = Sha256::digest(canonical_json(&doc).as_bytes());
        CacheKey(digest[..16].iter().map(|b| format!("{b:02x}")).collect())
    }
}

struct Entry {
    body: String,
    tick: u64,
}

struct State {
    entries: HashMap<CacheKey, Entry>,
    tick: u64,
}

pub struct ResponseCache {
    dir: Option<PathBuf>,
    capacity: usize,
    state: Mutex<State>,
}

impl ResponseCache {
    pub fn in_memory(capacity: usize) -> Self {
        Self {
            dir: None,
            capacity: capacity.max(1),
            state: Mutex::new(State {
                entries: HashMap::new(),
                tick: 0,
            }),
        }
    }

    /// Opens (creating if needed) a cache directory and loads the most
    /// recently written entries up to `capacity`.
    pub fn open(dir: &Path, capacity: usize) -> Result<Self, AppError> {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        let mut found = Vec::new();
        for entry in fs::read_dir(dir).map_err(|e| AppError::io(dir, e))? {
            let entry = entry.map_err(|e| AppError::io(dir, e))?;
            let path = entry.path();
            let Some(stem) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(".json"))
            else {
                continue;
            };
            if stem.len() != 32 || !stem.bytes().all(|b| b.is_ascii_hexdigit()) {
                continue;
            }
            let modified = entry.metadata().and_then(|m| m.modified()).ok();
            found.push((modified, stem.to_string(), path));
        }
        found.sort();
        let cache = Self {
            dir: Some(dir.to_path_buf()),
            ..Self::in_memory(capacity)
        };
        let skip = found.len().saturating_sub(cache.capacity);
        {
            let mut st = cache.state.lock().unwrap();
            for (_, stem, path) in found.into_iter().skip(skip) {
                if let Ok(body) = fs::read_to_string(&path) {
                    st.tick += 1;
                    let tick = st.tick;
                    st.entries.insert(CacheKey(stem), Entry { body, tick });
                }
            }
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.state.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &CacheKey) -> Option<String> {
        let mut st = self.state.lock().unwrap();
        st.tick += 1;
        let tick = st.tick;
        st.entries.get_mut(key).map(|e| {
            e.tick = tick;
            e.body.clone()
        })
    }

    /// Stores `body`. Racing puts of the same key carry the same content, so
    /// the last rename wins without harm.
    pub fn put(&self, key: &CacheKey, body: &str) {
        if let Some(dir) = &self.dir {
            // a failed disk write only loses persistence
            let _ = write_atomic(dir, key, body);
        }
        let evicted = {
            let mut st = self.state.lock().unwrap();
            st.tick += 1;
            let tick = st.tick;
            st.entries.insert(
                key.clone(),
                Entry {
                    body: body.to_string(),
                    tick,
                },
            );
            let mut evicted = Vec::new();
            while st.entries.len() > self.capacity {
                let oldest = st
                    .entries
                    .iter()
                    .min_by_key(|(_, e)| e.tick)
                    .map(|(k, _)| k.clone())
                    .expect("non-empty");
                st.entries.remove(&oldest);
                evicted.push(oldest);
            }
            evicted
        };
        if let Some(dir) = &self.dir {
            for k in evicted {
                let _ = fs::remove_file(dir.join(format!("{}.json", k.0)));
            }
        }
    }
}

fn write_atomic(dir: &Path, key: &CacheKey, body: &str) -> std::io::Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.persist(dir.join(format!("{}.json", key.0)))
        .map_err(|e| e.error)?;
    Ok(())
}
