//! Content-addressed window cache.
//!
//! `objects/<sha256>.cgw` holds serialized windows; `keys/<sha256 of spec>`
//! maps a generator spec string to the hash of the window it produced.

use std::fs;
use std::path::{Path, PathBuf};

use coarse_cut_core::GraphWindow;
use sha2::{Digest, Sha256};

use crate::format::{read_cgw, write_cgw};
use crate::Error;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "COARSE_CUT_CACHE";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// `$COARSE_CUT_CACHE`, or `.coarse-cut-cache` in the working directory.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_ENV).map_or_else(|| PathBuf::from(".coarse-cut-cache"), PathBuf::from))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn object(&self, hash: &str) -> PathBuf {
        self.root.join("objects").join(format!("{hash}.cgw"))
    }

    fn key_file(&self, key: &str) -> PathBuf {
        self.root.join("keys").join(sha256_hex(key.as_bytes()))
    }

    pub fn store(&self, w: &GraphWindow) -> Result<String, Error> {
        let text = write_cgw(w);
        let hash = sha256_hex(text.as_bytes());
        let path = self.object(&hash);
        if !path.exists() {
            fs::create_dir_all(path.parent().expect("object path has a parent"))?;
            // write-then-rename keeps a concurrent reader from seeing half a file
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            fs::write(&tmp, text)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(hash)
    }

    pub fn load(&self, hash: &str) -> Result<GraphWindow, Error> {
        let text = fs::read_to_string(self.object(hash))?;
        let actual = sha256_hex(text.as_bytes());
        if actual != hash {
            return Err(Error::HashMismatch {
                expected: hash.to_string(),
                actual,
            });
        }
        read_cgw(&text)
    }

    /// The window cached under `key`, built and stored on a miss. The flag
    /// reports a hit.
    pub fn window(
        &self,
        key: &str,
        build: impl FnOnce() -> Result<GraphWindow, Error>,
    ) -> Result<(GraphWindow, bool), Error> {
        let key_path = self.key_file(key);
        if let Ok(hash) = fs::read_to_string(&key_path) {
            match self.load(hash.trim()) {
                Ok(w) => return Ok((w, true)),
                Err(Error::HashMismatch { .. }) | Err(Error::Io(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let w = build()?;
        let hash = self.store(&w)?;
        fs::create_dir_all(key_path.parent().expect("key path has a parent"))?;
        fs::write(&key_path, &hash)?;
        Ok((w, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use coarse_cut_core::generators::grid_window;

    #[test]
    fn store_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let g = grid_window(2, 3).unwrap();
        let hash = cache.store(&g).unwrap();
        assert_eq!(write_cgw(&cache.load(&hash).unwrap()), write_cgw(&g));
    }

    #[test]
    fn corrupt_objects_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let hash = cache.store(&grid_window(1, 2).unwrap()).unwrap();
        fs::write(cache.object(&hash), "cgw v1 1 0 0 0\nv 0\n").unwrap();
        assert!(matches!(cache.load(&hash), Err(Error::HashMismatch { .. })));
    }

    #[test]
    fn second_request_hits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let (_, hit) = cache.window("grid 1 3", || Ok(grid_window(1, 3)?)).unwrap();
        assert!(!hit);
        let (w, hit) = cache
            .window("grid 1 3", || panic!("cache hit must not rebuild"))
            .unwrap();
        assert!(hit);
        assert_eq!(w.len(), 7);
    }
}
