//! Output directory layout and atomic writes.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use polsent_core::report::sha256_hex;
use serde::Serialize;
use tempfile::NamedTempFile;

pub const INGEST_CORPUS: &str = "ingest/corpus.jsonl";
pub const INGEST_MANIFEST: &str = "ingest/manifest.json";
pub const INGEST_ERRORS: &str = "ingest/errors.json";
pub const DEDUP_SURVIVORS: &str = "dedup/survivors.jsonl";
pub const DEDUP_CLUSTERS: &str = "dedup/clusters.json";
pub const MENTIONS: &str = "annotations/mentions.jsonl";
pub const KB_PERSONS: &str = "kb/persons.jsonl";
pub const KB_PARTIES: &str = "kb/parties.jsonl";
pub const KB_CROSSWALK: &str = "kb/crosswalk.csv";
pub const KB_COVERAGE: &str = "kb/coverage.json";
pub const INDEX: &str = "index/index.json";
pub const TOPIC_CATALOG: &str = "topics/catalog.json";
pub const TOPIC_SUBSETS: &str = "topics/subsets.json";
pub const REPORTS_DIR: &str = "reports";
pub const STATS_DIR: &str = "stats";
pub const LOGS_DIR: &str = "logs";

/// Files staged in memory and written together once a stage has finished.
#[derive(Debug, Default)]
pub struct Outputs {
    files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    pub fn add(&mut self, relative: impl Into<String>, bytes: Vec<u8>) {
        self.files.insert(relative.into(), bytes);
    }

    pub fn add_json<T: Serialize>(&mut self, relative: impl Into<String>, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable artifact");
        bytes.push(b'\n');
        self.add(relative, bytes);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    /// Each file is written to a temporary sibling and renamed into place,
    /// so an interrupted run never leaves a truncated artifact behind.
    pub fn commit(self, root: &Path) -> io::Result<Vec<(String, String)>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (relative, bytes) in self.files {
            write_atomic(&root.join(&relative), &bytes)?;
            written.push((relative, sha256_hex(&bytes)));
        }
        Ok(written)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// An artifact a stage reads from an earlier stage.
pub fn upstream(root: &Path, relative: &str, produced_by: &str) -> Result<PathBuf, crate::error::CliError> {
    let path = root.join(relative);
    if path.is_file() {
        Ok(path)
    } else {
        Err(crate::error::CliError::config(format!(
            "{} not found; run `{produced_by}` first",
            path.display()
        )))
    }
}

pub fn file_digest(path: &Path) -> io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Machine-readable record of one stage run. Contains no timestamps so that
/// reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct RunLog {
    pub stage: String,
    pub status: &'static str,
    pub settings_hash: String,
    pub seed: Option<u64>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub counts: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
}
