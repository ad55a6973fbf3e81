//! Transactional record store and content-addressed blobs.
//!
//! The whole record set lives in memory behind one lock. A transaction
//! works on a copy, and the copy replaces the live set only after it has
//! been persisted, so readers never see half of a transaction.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use sha2::{Digest, Sha256};

use crate::error::{ErrorCode, Result, ServiceError};
use crate::model::Db;

fn storage_error(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::new(ErrorCode::Storage, e.to_string())
}

/// Durable backing for the record set.
pub trait Persist: Send + Sync {
    fn load(&self) -> Result<Option<Db>>;
    fn save(&self, db: &Db) -> Result<()>;
}

/// Keeps nothing; for tests and throwaway servers.
pub struct NoPersist;

impl Persist for NoPersist {
    fn load(&self) -> Result<Option<Db>> {
        Ok(None)
    }

    fn save(&self, _: &Db) -> Result<()> {
        Ok(())
    }
}

/// One JSON document, replaced by write-then-rename.
pub struct JsonFile {
    path: PathBuf,
}

impl JsonFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        JsonFile { path: path.into() }
    }
}

/// Writes `bytes` to a sibling temp file, syncs it and renames it over
/// `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{}.{}.tmp", path.file_name().and_then(|n| n.to_str()).unwrap_or("f"), uuid::Uuid::new_v4()));
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

impl Persist for JsonFile {
    fn load(&self) -> Result<Option<Db>> {
        match std::fs::read(&self.path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| storage_error(format!("{}: {e}", self.path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(storage_error(format!("{}: {e}", self.path.display()))),
        }
    }

    fn save(&self, db: &Db) -> Result<()> {
        let bytes = serde_json::to_vec(db).expect("records serialize");
        write_atomic(&self.path, &bytes).map_err(|e| storage_error(format!("{}: {e}", self.path.display())))
    }
}

pub struct Store {
    db: RwLock<Db>,
    persist: Box<dyn Persist>,
}

impl Store {
    pub fn open(persist: Box<dyn Persist>) -> Result<Self> {
        let db = persist.load()?.unwrap_or_default();
        Ok(Store { db: RwLock::new(db), persist })
    }

    pub fn in_memory() -> Self {
        Store { db: RwLock::new(Db::default()), persist: Box::new(NoPersist) }
    }

    pub fn read<R>(&self, f: impl FnOnce(&Db) -> R) -> R {
        f(&self.db.read().expect("store lock"))
    }

    /// Runs `f` on a copy of the records. The copy is saved and published
    /// only if `f` succeeds and the save succeeds; otherwise nothing changes.
    pub fn transact<R>(&self, f: impl FnOnce(&mut Db) -> Result<R>) -> Result<R> {
        let mut live = self.db.write().expect("store lock");
        let mut next = live.clone();
        let out = f(&mut next)?;
        self.persist.save(&next)?;
        *live = next;
        Ok(out)
    }
}

/// Artifacts keyed by the hex SHA-256 of their bytes.
pub enum BlobStore {
    Dir(PathBuf),
    Memory(Mutex<HashMap<String, Vec<u8>>>),
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl BlobStore {
    pub fn dir(path: impl Into<PathBuf>) -> Self {
        BlobStore::Dir(path.into())
    }

    pub fn in_memory() -> Self {
        BlobStore::Memory(Mutex::new(HashMap::new()))
    }

    pub fn put(&self, bytes: &[u8]) -> Result<String> {
        let hash = content_hash(bytes);
        match self {
            BlobStore::Dir(dir) => {
                let path = dir.join(&hash);
                if !path.exists() {
                    write_atomic(&path, bytes).map_err(storage_error)?;
                }
            }
            BlobStore::Memory(m) => {
                m.lock().expect("blob lock").entry(hash.clone()).or_insert_with(|| bytes.to_vec());
            }
        }
        Ok(hash)
    }

    pub fn get(&self, hash: &str) -> Result<Option<Vec<u8>>> {
        if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Ok(None);
        }
        match self {
            BlobStore::Dir(dir) => match std::fs::read(dir.join(hash)) {
                Ok(b) => Ok(Some(b)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(storage_error(e)),
            },
            BlobStore::Memory(m) => Ok(m.lock().expect("blob lock").get(hash).cloned()),
        }
    }
}
