use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;
use crate::persist::{write_atomic, write_json_atomic};

/// Prefix of the one header line that carries the generation time.
pub const TIMESTAMP_PREFIX: &str = "# generated_at_unix=";

/// Output directory layout: `sweep.csv` and other tables at the root,
/// JSON reports under `reports/`, flag banks under `banks/`.
#[derive(Debug, Clone)]
pub struct Outputs {
    root: PathBuf,
}

impl Outputs {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn report_path(&self, name: &str) -> PathBuf {
        self.root.join("reports").join(format!("{name}.json"))
    }

    pub fn bank_path(&self, name: &str) -> PathBuf {
        self.root.join("banks").join(format!("{name}.flags"))
    }

    pub fn table_path(&self, name: &str) -> PathBuf {
        self.root.join(format!("{name}.csv"))
    }

    pub fn write_report<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let p = self.report_path(name);
        write_json_atomic(&p, value)?;
        Ok(p)
    }

    /// Writes a CSV table behind a timestamp header line.
    pub fn write_table(&self, name: &str, csv: &[u8]) -> Result<PathBuf> {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let mut bytes = format!("{TIMESTAMP_PREFIX}{secs}\n").into_bytes();
        bytes.extend_from_slice(csv);
        let p = self.table_path(name);
        write_atomic(&p, &bytes)?;
        Ok(p)
    }
}

/// File content with the timestamp header line removed.
pub fn strip_timestamp(bytes: &[u8]) -> &[u8] {
    if bytes.starts_with(TIMESTAMP_PREFIX.as_bytes()) {
        match bytes.iter().position(|&b| b == b'\n') {
            Some(end) => &bytes[end + 1..],
            None => &[],
        }
    } else {
        bytes
    }
}

/// Relative paths of files that differ between two output trees (or exist
/// in only one), ignoring timestamp header lines.
pub fn compare_outputs(a: &Path, b: &Path) -> Result<Vec<String>> {
    let list = |root: &Path| -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
            let entry = entry.map_err(|e| std::io::Error::other(e.to_string()))?;
            if entry.file_type().is_file() {
                files.push(entry.path().strip_prefix(root).expect("below root").to_path_buf());
            }
        }
        Ok(files)
    };
    let (fa, fb) = (list(a)?, list(b)?);
    let mut diffs: Vec<String> = fa.iter().filter(|p| !fb.contains(p)).chain(fb.iter().filter(|p| !fa.contains(p))).map(|p| p.display().to_string()).collect();
    for p in fa.iter().filter(|p| fb.contains(p)) {
        let (x, y) = (std::fs::read(a.join(p))?, std::fs::read(b.join(p))?);
        if strip_timestamp(&x) != strip_timestamp(&y) {
            diffs.push(p.display().to_string());
        }
    }
    diffs.sort();
    Ok(diffs)
}
