//! Append-only response cache for HTTP providers.
//!
//! Entries are keyed by `sha256(provider || 0x00 || canonical request JSON)`
//! and stored one JSON object per line. The file is read once at startup;
//! appends are serialized behind a mutex so concurrent callers never
//! interleave partial lines.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::ProviderError;

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    provider: String,
    response: Value,
}

pub struct ResponseCache {
    path: PathBuf,
    entries: Mutex<HashMap<String, Value>>,
    file: Mutex<File>,
}

/// Hex digest identifying one provider request.
pub fn cache_key(provider: &str, request: &Value) -> String {
    // serde_json maps are ordered, so to_string is canonical
    let mut h = Sha256::new();
    h.update(provider.as_bytes());
    h.update([0u8]);
    h.update(request.to_string().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl ResponseCache {
    pub fn open(path: &Path) -> Result<Self, ProviderError> {
        let cfg_err = |e: std::io::Error| ProviderError::Config(format!("cache {}: {e}", path.display()));
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(cfg_err)?;
        }
        let mut entries = HashMap::new();
        let mut torn = false;
        if path.exists() {
            let mut reader = BufReader::new(File::open(path).map_err(cfg_err)?);
            let mut line = String::new();
            while reader.read_line(&mut line).map_err(cfg_err)? > 0 {
                torn = !line.ends_with('\n');
                // a torn final line from an interrupted run is ignored
                if let Ok(e) = serde_json::from_str::<Entry>(line.trim_end()) {
                    entries.insert(e.key, e.response);
                }
                line.clear();
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(cfg_err)?;
        if torn {
            file.write_all(b"\n").map_err(cfg_err)?;
        }
        Ok(ResponseCache { path: path.to_path_buf(), entries: Mutex::new(entries), file: Mutex::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        self.entries.lock().get(key).cloned()
    }

    pub fn put(&self, key: &str, provider: &str, response: &Value) -> Result<(), ProviderError> {
        let line = serde_json::to_string(&Entry { key: key.into(), provider: provider.into(), response: response.clone() })
            .expect("json values serialize");
        {
            let mut f = self.file.lock();
            writeln!(f, "{line}")
                .and_then(|_| f.flush())
                .map_err(|e| ProviderError::Config(format!("cache {}: {e}", self.path.display())))?;
        }
        self.entries.lock().insert(key.to_string(), response.clone());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_ignores_field_order() {
        let a: Value = serde_json::from_str(r#"{"a":1,"b":2}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"b":2,"a":1}"#).unwrap();
        assert_eq!(cache_key("p", &a), cache_key("p", &b));
        assert_ne!(cache_key("p", &a), cache_key("q", &a));
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cache.jsonl");
        let c = ResponseCache::open(&path).unwrap();
        c.put("k", "p", &json!({"score": 0.5})).unwrap();
        drop(c);
        std::fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(b"{\"torn").unwrap();
        let c = ResponseCache::open(&path).unwrap();
        assert_eq!(c.get("k"), Some(json!({"score": 0.5})));
        assert_eq!(c.len(), 1);
        c.put("k2", "p", &json!(1)).unwrap();
        drop(c);
        assert_eq!(ResponseCache::open(&path).unwrap().len(), 2);
    }
}
