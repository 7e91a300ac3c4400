//! On-disk animation cache.
//!
//! ```text
//! <root>/index.json                       id -> entry, replaced atomically
//! <root>/<id>/                            GAD files and data/ of one animation
//! <root>/blocks/<dataset>/<field>/...     fetched blocks shared across ids
//! ```
//!
//! An entry is added only after all of its files are in place, and lookups
//! evict entries whose files are missing or truncated.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use gad_core::VoxelBox;
use serde::{Deserialize, Serialize};
use tokio::sync::OwnedMutexGuard;

use crate::spec::AnimationId;
use crate::AccessError;

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedFile {
    /// Path relative to the animation directory.
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub dataset: String,
    pub files: Vec<CachedFile>,
    pub created_unix: u64,
}

impl CacheEntry {
    pub fn total_bytes(&self) -> u64 {
        self.files.iter().map(|f| f.bytes).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CacheIndex {
    pub entries: BTreeMap<String, CacheEntry>,
}

pub struct AnimationCache {
    root: PathBuf,
    index: Mutex<CacheIndex>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl std::fmt::Debug for AnimationCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnimationCache").field("root", &self.root).finish_non_exhaustive()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> AccessError {
    AccessError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

impl AnimationCache {
    /// Opens (creating if needed) a cache rooted at `root`. An unreadable
    /// index starts the cache empty.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, AccessError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
        let path = root.join(INDEX_FILE);
        let index = match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes).unwrap_or_else(|e| {
                tracing::warn!(path = %path.display(), error = %e, "discarding unreadable cache index");
                CacheIndex::default()
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => CacheIndex::default(),
            Err(e) => return Err(io_err(&path, e)),
        };
        Ok(Self {
            root,
            index: Mutex::new(index),
            locks: Mutex::default(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn animation_dir(&self, id: &AnimationId) -> PathBuf {
        self.root.join(id.as_str())
    }

    /// Shared location of a fetched block, keyed by everything that
    /// determines its content.
    pub fn block_path(&self, dataset: &str, field: &str, t: u32, q: i32, region: &VoxelBox) -> PathBuf {
        let [x1, y1, z1] = region.min;
        let [x2, y2, z2] = region.max;
        self.root.join("blocks").join(dataset).join(field).join(format!(
            "t{t:05}_q{}_{x1}-{y1}-{z1}_{x2}-{y2}-{z2}.f32",
            q.unsigned_abs()
        ))
    }

    /// Serializes work on one id. Holders of the guard are the only writers
    /// of that id's directory and index entry.
    pub async fn lock(&self, id: &AnimationId) -> OwnedMutexGuard<()> {
        let m = {
            let mut locks = self.locks.lock().expect("lock table poisoned");
            locks.entry(id.as_str().to_string()).or_default().clone()
        };
        m.lock_owned().await
    }

    pub fn ids(&self) -> Vec<String> {
        self.index.lock().expect("index poisoned").entries.keys().cloned().collect()
    }

    /// The entry for `id` if every file it lists is present with the
    /// recorded size. Otherwise the entry is evicted and `None` returned.
    pub fn lookup(&self, id: &AnimationId) -> Result<Option<CacheEntry>, AccessError> {
        let entry = self.index.lock().expect("index poisoned").entries.get(id.as_str()).cloned();
        let Some(entry) = entry else {
            return Ok(None);
        };
        let dir = self.animation_dir(id);
        let intact = entry.files.iter().all(|f| {
            fs::metadata(dir.join(&f.path))
                .map(|m| m.is_file() && m.len() == f.bytes)
                .unwrap_or(false)
        });
        if intact {
            Ok(Some(entry))
        } else {
            tracing::warn!(%id, "evicting cache entry with missing or truncated files");
            self.evict(id)?;
            Ok(None)
        }
    }

    /// Records `id` after its directory is complete.
    pub fn insert(&self, id: &AnimationId, dataset: &str, files: &[PathBuf]) -> Result<CacheEntry, AccessError> {
        let dir = self.animation_dir(id);
        let mut listed = Vec::with_capacity(files.len());
        for rel in files {
            let p = dir.join(rel);
            let m = fs::metadata(&p).map_err(|e| io_err(&p, e))?;
            listed.push(CachedFile {
                path: rel.to_string_lossy().replace('\\', "/"),
                bytes: m.len(),
            });
        }
        let entry = CacheEntry {
            dataset: dataset.to_string(),
            files: listed,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        let mut index = self.index.lock().expect("index poisoned");
        index.entries.insert(id.as_str().to_string(), entry.clone());
        self.persist(&index)?;
        Ok(entry)
    }

    /// Drops the index entry and the animation directory. Shared blocks stay.
    pub fn evict(&self, id: &AnimationId) -> Result<(), AccessError> {
        {
            let mut index = self.index.lock().expect("index poisoned");
            if index.entries.remove(id.as_str()).is_some() {
                self.persist(&index)?;
            }
        }
        let dir = self.animation_dir(id);
        match fs::remove_dir_all(&dir) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(io_err(&dir, e)),
        }
    }

    fn persist(&self, index: &CacheIndex) -> Result<(), AccessError> {
        let path = self.root.join(INDEX_FILE);
        let tmp = self.root.join(format!("{INDEX_FILE}.tmp{}", std::process::id()));
        let bytes = serde_json::to_vec_pretty(index).expect("index serializes");
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        };
        write().map_err(|e| io_err(&path, e))
    }
}

/// Puts `src` at `dst`, hard-linking when the filesystem allows it.
pub fn link_or_copy(src: &Path, dst: &Path) -> Result<(), AccessError> {
    if let Some(parent) = dst.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let _ = fs::remove_file(dst);
    if fs::hard_link(src, dst).is_ok() {
        return Ok(());
    }
    fs::copy(src, dst).map(|_| ()).map_err(|e| io_err(dst, e))
}

/// Writes `bytes` to `path` through a temporary file and a rename, so a
/// crash never leaves a partial file under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), AccessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| io_err(path, e))
}
