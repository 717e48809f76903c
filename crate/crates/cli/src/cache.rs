//! Content-addressed result cache: one JSON file per record, written by
//! atomic rename so readers never see a partial file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub op: String,
    pub inputs: Value,
    pub precision: i64,
    pub version: String,
    /// Hash of `(op, inputs, version)`; the file name.
    pub key: String,
    pub payload: Value,
    /// Hash of `(key, precision, payload)`.
    pub content_hash: String,
    /// Diagnostics that depend on how the result was reached.
    pub diagnostics: Value,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    /// A higher-precision record was truncated.
    HitTruncated,
    Miss,
    /// A lower-precision record was replaced.
    Superseded,
    /// An unreadable record was removed and recomputed.
    Evicted,
    Disabled,
}

impl CacheStatus {
    pub fn label(self) -> &'static str {
        match self {
            CacheStatus::Hit => "hit",
            CacheStatus::HitTruncated => "hit (truncated)",
            CacheStatus::Miss => "miss",
            CacheStatus::Superseded => "miss (superseded lower precision)",
            CacheStatus::Evicted => "miss (evicted corrupt entry)",
            CacheStatus::Disabled => "disabled",
        }
    }
}

/// Result of a computation: a precision-stable payload plus diagnostics.
pub struct Computed {
    pub payload: Value,
    pub diagnostics: Value,
}

/// Lowers a payload computed at a higher precision to the requested one;
/// only provided when the truncation equals a recomputation.
pub type Truncate = fn(&Value, i64) -> CliResult<Value>;

fn sha(v: &Value) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(v).expect("serializable")))
}

pub fn record_key(op: &str, inputs: &Value) -> String {
    sha(&json!({ "op": op, "inputs": inputs, "version": VERSION }))
}

fn content_hash(key: &str, precision: i64, payload: &Value) -> String {
    sha(&json!({ "key": key, "precision": precision, "payload": payload }))
}

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn disabled() -> Cache {
        Cache { dir: None }
    }

    pub fn at(dir: impl AsRef<Path>) -> CliResult<Cache> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| CliError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Cache { dir: Some(dir) })
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    fn read(&self, path: &Path, key: &str) -> CliResult<Option<Result<ResultRecord, ()>>> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CliError::Cache(format!("{}: {e}", path.display()))),
        };
        let rec: ResultRecord = match serde_json::from_str(&text) {
            Ok(r) => r,
            Err(_) => return Ok(Some(Err(()))),
        };
        let sound = rec.key == key && rec.content_hash == content_hash(key, rec.precision, &rec.payload);
        Ok(Some(if sound { Ok(rec) } else { Err(()) }))
    }

    fn write(&self, path: &Path, rec: &ResultRecord) -> CliResult<()> {
        let dir = path.parent().expect("cache file has a directory");
        let io = |e: std::io::Error| CliError::Cache(format!("{}: {e}", path.display()));
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(serde_json::to_string_pretty(rec)?.as_bytes()).map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(())
    }

    /// Return the record for `(op, inputs)` at `precision`, computing and
    /// storing it unless a usable record exists.
    pub fn get_or_compute(
        &self,
        op: &str,
        inputs: &Value,
        precision: i64,
        truncate: Option<Truncate>,
        compute: impl FnOnce() -> CliResult<Computed>,
    ) -> CliResult<(ResultRecord, CacheStatus)> {
        let key = record_key(op, inputs);
        let path = self.path(&key);
        let mut status = if path.is_some() { CacheStatus::Miss } else { CacheStatus::Disabled };
        let mut keep_existing = false;
        if let Some(p) = &path {
            match self.read(p, &key)? {
                None => {}
                Some(Err(())) => {
                    fs::remove_file(p).map_err(|e| CliError::Cache(format!("{}: {e}", p.display())))?;
                    status = CacheStatus::Evicted;
                }
                Some(Ok(rec)) if rec.precision == precision => return Ok((rec, CacheStatus::Hit)),
                Some(Ok(rec)) if rec.precision > precision => {
                    if let Some(t) = truncate {
                        let payload = t(&rec.payload, precision)?;
                        let content_hash = content_hash(&key, precision, &payload);
                        let out = ResultRecord { precision, payload, content_hash, ..rec };
                        return Ok((out, CacheStatus::HitTruncated));
                    }
                    keep_existing = true;
                }
                Some(Ok(_)) => status = CacheStatus::Superseded,
            }
        }
        let start = Instant::now();
        let Computed { payload, diagnostics } = compute()?;
        let rec = ResultRecord {
            op: op.to_string(),
            inputs: inputs.clone(),
            precision,
            version: VERSION.to_string(),
            content_hash: content_hash(&key, precision, &payload),
            key,
            payload,
            diagnostics,
            elapsed_ms: start.elapsed().as_millis() as u64,
        };
        if let Some(p) = &path {
            if !keep_existing {
                self.write(p, &rec)?;
            }
        }
        Ok((rec, status))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn compute(calls: &Cell<u32>, p: i64) -> CliResult<Computed> {
        calls.set(calls.get() + 1);
        Ok(Computed { payload: json!({ "p": p }), diagnostics: json!(null) })
    }

    #[test]
    fn hit_supersede_and_evict() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path()).unwrap();
        let calls = Cell::new(0);
        let inputs = json!({ "a": 1 });
        let (r1, s1) = cache.get_or_compute("op", &inputs, 8, None, || compute(&calls, 8)).unwrap();
        let (r2, s2) = cache.get_or_compute("op", &inputs, 8, None, || compute(&calls, 8)).unwrap();
        assert_eq!((s1, s2, calls.get()), (CacheStatus::Miss, CacheStatus::Hit, 1));
        assert_eq!(r1.payload, r2.payload);
        let (_, s3) = cache.get_or_compute("op", &inputs, 12, None, || compute(&calls, 12)).unwrap();
        assert_eq!((s3, calls.get()), (CacheStatus::Superseded, 2));
        let path = dir.path().join(format!("{}.json", record_key("op", &inputs)));
        fs::write(&path, "{ not json").unwrap();
        let (r4, s4) = cache.get_or_compute("op", &inputs, 12, None, || compute(&calls, 12)).unwrap();
        assert_eq!((s4, r4.payload), (CacheStatus::Evicted, json!({ "p": 12 })));
    }

    #[test]
    fn truncated_hits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path()).unwrap();
        let calls = Cell::new(0);
        let t: Truncate = |v, p| Ok(json!({ "p": v["p"].as_i64().unwrap().min(p) }));
        cache.get_or_compute("op", &json!(1), 12, Some(t), || compute(&calls, 12)).unwrap();
        let (r, s) = cache.get_or_compute("op", &json!(1), 8, Some(t), || compute(&calls, 8)).unwrap();
        assert_eq!((s, r.payload, calls.get()), (CacheStatus::HitTruncated, json!({ "p": 8 }), 1));
    }
}
