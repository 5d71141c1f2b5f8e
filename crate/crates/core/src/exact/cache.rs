//! On-disk JSON cache for oracle results, keyed by (graph hash, query hash).

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize, Deserialize)]
struct Entry<V> {
    graph: String,
    query: String,
    value: V,
}

#[derive(Clone, Debug)]
pub struct OracleCache {
    dir: PathBuf,
}

impl OracleCache {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { dir: dir.as_ref().to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, graph: &str, query: &str) -> PathBuf {
        self.dir.join(format!("{}-{}.json", &graph[..16], &query[..16]))
    }

    /// Cached value for the pair, or `compute` stored under it. Entries whose
    /// full hashes disagree with the key are treated as misses.
    pub fn get_or_compute<Q, V, F>(&self, graph_hash: &str, query: &Q, compute: F) -> Result<V>
    where
        Q: Serialize,
        V: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<V>,
    {
        if graph_hash.len() < 16 {
            return Err(Error::Config(format!("graph hash {graph_hash:?} is too short")));
        }
        let query_hash = sha256_hex(serde_json::to_string(query)?.as_bytes());
        let path = self.path(graph_hash, &query_hash);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(e) = serde_json::from_str::<Entry<V>>(&text) {
                if e.graph == graph_hash && e.query == query_hash {
                    return Ok(e.value);
                }
            }
        }
        let value = compute()?;
        let entry = Entry { graph: graph_hash.to_string(), query: query_hash, value };
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec_pretty(&entry)?)?;
        fs::rename(&tmp, &path)?;
        Ok(entry.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_box;
    use std::cell::Cell;

    #[test]
    fn computes_once() {
        let dir = tempfile::tempdir().unwrap();
        let cache = OracleCache::open(dir.path()).unwrap();
        let g = build_box(1.0, [[0.0, 0.0], [1.0, 1.0]]).unwrap().fingerprint();
        let calls = Cell::new(0);
        for _ in 0..3 {
            let v: Vec<f64> = cache
                .get_or_compute(&g, &("two_point", [0, 3]), || {
                    calls.set(calls.get() + 1);
                    Ok(vec![0.25, 0.5])
                })
                .unwrap();
            assert_eq!(v, vec![0.25, 0.5]);
        }
        assert_eq!(calls.get(), 1);
        let other: f64 = cache.get_or_compute(&g, &("two_point", [0, 1]), || Ok(1.0)).unwrap();
        assert_eq!(other, 1.0);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
    }

    #[test]
    fn fingerprint_distinguishes_domains() {
        let a = build_box(1.0, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let b = build_box(1.0, [[0.0, 0.0], [2.0, 1.0]]).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }
}
