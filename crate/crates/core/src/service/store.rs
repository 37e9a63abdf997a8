//! File-backed persistence.
//!
//! ```text
//! <root>/sessions/<id>.json      session snapshots
//! <root>/jobs/<id>.json          render jobs
//! <root>/gallery/<id>.json       gallery entries
//! <root>/blobs/<sha256>.<ext>    uploaded portraits and rendered PNGs
//! <root>/renders/<id>.phaseN.png phase outputs, named by job
//! ```
//!
//! Writes go to a temporary file first and are renamed into place, so a
//! crash never leaves a half-written record behind.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

const DIRS: [&str; 5] = ["sessions", "jobs", "gallery", "blobs", "renders"];
const BLOB_EXTS: [(&str, &str); 2] = [("png", "image/png"), ("jpg", "image/jpeg")];

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Refs are lowercase sha256 hex; anything else never touches the disk.
pub fn is_valid_ref(r: &str) -> bool {
    r.len() == 64
        && r.bytes()
            .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        for d in DIRS {
            fs::create_dir_all(root.join(d))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Stores `bytes` under their hash; `ext` is `png` or `jpg`. Storing the
    /// same bytes twice is a no-op returning the same ref.
    pub fn put_blob(&self, bytes: &[u8], ext: &str) -> io::Result<String> {
        let r = content_hash(bytes);
        let path = self.root.join("blobs").join(format!("{r}.{ext}"));
        if !path.exists() {
            write_atomic(&path, bytes)?;
        }
        Ok(r)
    }

    /// Path and MIME type of a stored blob.
    pub fn find_blob(&self, r: &str) -> Option<(PathBuf, &'static str)> {
        if !is_valid_ref(r) {
            return None;
        }
        BLOB_EXTS.iter().find_map(|(ext, mime)| {
            let p = self.root.join("blobs").join(format!("{r}.{ext}"));
            p.is_file().then_some((p, *mime))
        })
    }

    pub fn write_phase(&self, job_id: &str, phase: usize, png: &[u8]) -> io::Result<PathBuf> {
        let path = self
            .root
            .join("renders")
            .join(format!("{job_id}.phase{phase}.png"));
        write_atomic(&path, png)?;
        Ok(path)
    }

    pub fn save<T: Serialize>(&self, kind: &str, id: &str, value: &T) -> io::Result<()> {
        let bytes = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
        write_atomic(&self.root.join(kind).join(format!("{id}.json")), &bytes)
    }

    /// Every record of one kind. Unreadable files are skipped with a warning
    /// rather than blocking startup.
    pub fn load_all<T: DeserializeOwned>(&self, kind: &str) -> io::Result<Vec<T>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join(kind))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            match fs::read(&path).map(|b| serde_json::from_slice::<T>(&b)) {
                Ok(Ok(v)) => out.push(v),
                Ok(Err(e)) => {
                    tracing::warn!(path = %path.display(), error = %e, "skipping bad record")
                }
                Err(e) => {
                    tracing::warn!(path = %path.display(), error = %e, "skipping unreadable record")
                }
            }
        }
        Ok(out)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(format!("tmp-{}", uuid::Uuid::new_v4().simple()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}
