use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mismatch_core::Budget;
use serde::Serialize;

use crate::error::{LabError, LabResult};

/// A fresh output directory for one run.
#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
    started: Instant,
    started_at: String,
    files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetRecord {
    pub atoms: usize,
    pub enumeration: u64,
    pub cells: usize,
    pub simplex: usize,
}

impl From<&Budget> for BudgetRecord {
    fn from(b: &Budget) -> Self {
        BudgetRecord {
            atoms: b.atoms,
            enumeration: b.enumeration,
            cells: b.cells,
            simplex: b.simplex,
        }
    }
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub args: Vec<String>,
    pub problem: Option<String>,
    pub problem_name: Option<String>,
    pub format: &'static str,
    pub budget: BudgetRecord,
    pub started_at: String,
    pub wall_time_s: f64,
    pub files: Vec<String>,
}

impl RunDir {
    /// Creates `<root>/<command>-<UTC timestamp>-<pid>`, adding a counter
    /// suffix if that name is taken. Existing directories are never reused.
    pub fn create(root: &Path, command: &str) -> LabResult<RunDir> {
        let now = chrono::Utc::now();
        let stamp = now.format("%Y%m%dT%H%M%S%.6fZ").to_string();
        let base = format!("{command}-{stamp}-{}", std::process::id());
        fs::create_dir_all(root).map_err(|source| LabError::Write {
            path: root.to_path_buf(),
            source,
        })?;
        for attempt in 0u32.. {
            let name = if attempt == 0 { base.clone() } else { format!("{base}-{attempt}") };
            let path = root.join(name);
            match fs::create_dir(&path) {
                Ok(()) => {
                    return Ok(RunDir {
                        path,
                        started: Instant::now(),
                        started_at: now.to_rfc3339(),
                        files: Vec::new(),
                    })
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
                Err(source) => return Err(LabError::Write { path, source }),
            }
        }
        unreachable!("the attempt counter is unbounded")
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Records a file written into the directory.
    pub fn record(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.files.push(name.to_string_lossy().into_owned());
        }
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> LabResult<PathBuf> {
        let path = self.path.join(name);
        fs::write(&path, text).map_err(|source| LabError::Write {
            path: path.clone(),
            source,
        })?;
        self.record(&path);
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> LabResult<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(|e| LabError::Internal(e.to_string()))?;
        self.write_text(name, &(text + "\n"))
    }

    pub fn elapsed_s(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    pub fn started_at(&self) -> &str {
        &self.started_at
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}
