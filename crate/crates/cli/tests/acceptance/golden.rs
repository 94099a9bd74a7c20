use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::Outcome;

pub fn fixture_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic/pipeline.json")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs every stage on the bundled fixture with `threads` worker threads.
pub fn run_pipeline(threads: usize) -> Result<tempfile::TempDir, String> {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_polsent"))
        .arg("--config")
        .arg(fixture_config())
        .arg("--output-dir")
        .arg(out.path())
        .arg("run-all")
        .env("RAYON_NUM_THREADS", threads.to_string())
        .env_remove("POLSENT_OUTPUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("run-all failed: {}", String::from_utf8_lossy(&status.stderr)));
    }
    Ok(out)
}

pub fn csv_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|x| x == "csv") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            files.insert(name, fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(files)
}

pub fn run() -> Outcome {
    let golden = csv_files(&golden_dir())?;
    ensure!(golden.len() == 19, "expected 19 golden reports, found {}", golden.len());
    for threads in [1, 8] {
        let out = run_pipeline(threads)?;
        let got = csv_files(&out.path().join("reports"))?;
        ensure!(
            got.keys().eq(golden.keys()),
            "{threads} thread(s): report set {:?} differs from golden",
            got.keys().collect::<Vec<_>>()
        );
        for (name, bytes) in &golden {
            ensure!(&got[name] == bytes, "{threads} thread(s): {name} differs from golden");
        }
    }
    Ok(format!(
        "{} reports byte-identical to golden at 1 and 8 threads",
        golden.len()
    ))
}
