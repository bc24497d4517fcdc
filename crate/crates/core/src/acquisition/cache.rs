//! On-disk tile cache.
//!
//! Entries are written to a temporary file in the same directory and then
//! renamed into place, so a reader never observes a partial payload. The
//! manifest CSV maps cache keys to the owning tract and fetch time.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::geo::TileSpec;

use super::{io_err, AcquisitionError, Result};

pub const CACHE_MANIFEST: &str = "manifest.csv";

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub key: String,
    pub tract_id: String,
    pub fetched_at: String,
}

#[derive(Clone, Debug)]
pub struct TileCache {
    dir: PathBuf,
}

impl TileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TileCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// `z{zoom}_{lat:.6}_{lon:.6}_{w}x{h}.png`
    pub fn key(spec: &TileSpec) -> String {
        format!(
            "z{}_{:.6}_{:.6}_{}x{}.png",
            spec.zoom, spec.center.lat, spec.center.lon, spec.width_px, spec.height_px
        )
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.path(key).is_file()
    }

    pub fn read(&self, key: &str) -> Result<Option<Vec<u8>>> {
        match fs::read(self.path(key)) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(self.path(key))(e)),
        }
    }

    pub fn write(&self, key: &str, bytes: &[u8]) -> Result<()> {
        atomic_write(&self.path(key), bytes)
    }

    pub fn read_manifest(&self) -> Result<Vec<CacheEntry>> {
        let path = self.dir.join(CACHE_MANIFEST);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let mut reader = csv::Reader::from_path(&path).map_err(|e| AcquisitionError::Fixture {
            line: 0,
            message: e.to_string(),
        })?;
        let mut out = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| AcquisitionError::Fixture {
                line: i + 2,
                message: e.to_string(),
            })?;
            if rec.len() < 3 {
                return Err(AcquisitionError::Fixture {
                    line: i + 2,
                    message: "expected key,tract_id,fetched_at".into(),
                });
            }
            out.push(CacheEntry {
                key: rec[0].to_string(),
                tract_id: rec[1].to_string(),
                fetched_at: rec[2].to_string(),
            });
        }
        Ok(out)
    }

    /// Merges `entries` into the manifest (new entries replace old ones with
    /// the same key) and rewrites it sorted by key.
    pub fn record(&self, entries: &[CacheEntry]) -> Result<()> {
        if entries.is_empty() {
            return Ok(());
        }
        let mut merged: BTreeMap<String, CacheEntry> =
            self.read_manifest()?.into_iter().map(|e| (e.key.clone(), e)).collect();
        for e in entries {
            merged.insert(e.key.clone(), e.clone());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| AcquisitionError::Io {
            path: self.dir.join(CACHE_MANIFEST),
            source: std::io::Error::other(e),
        };
        w.write_record(["key", "tract_id", "fetched_at"]).map_err(csv_err)?;
        for e in merged.values() {
            w.write_record([&e.key, &e.tract_id, &e.fetched_at]).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
        atomic_write(&self.dir.join(CACHE_MANIFEST), &bytes)
    }
}

/// Write-temp-then-rename.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("entry");
    let tmp = dir.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path)(e)
    })
}
