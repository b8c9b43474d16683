use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::pipeline::{RunResult, RunStage};
use super::OrchestratorError;

pub const RESULTS_FILE: &str = "results.jsonl";
pub const FAILURES_FILE: &str = "failures.jsonl";

/// A run that aborted, as recorded in `failures.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub config: PipelineConfig,
    pub split_index: usize,
    pub split_fingerprint: String,
    pub stage: RunStage,
    pub message: String,
}

type RunKey = (String, PipelineConfig, String);

fn key_of(r: &RunResult) -> RunKey {
    (r.protocol.clone(), r.config, r.split_fingerprint.clone())
}

struct Sinks {
    results: File,
    failures: File,
}

/// Append-only JSON-Lines store of run results.
///
/// Opening an existing directory loads earlier results so that an
/// interrupted experiment resumes where it stopped: runs are looked up by
/// (protocol digest, pipeline, split fingerprint). A partially written last
/// line is cut off.
pub struct ResultStore {
    dir: Option<PathBuf>,
    sinks: Mutex<Option<Sinks>>,
    known: Mutex<HashMap<RunKey, RunResult>>,
}

impl ResultStore {
    /// Store without files, for in-process experiments.
    pub fn in_memory() -> Self {
        ResultStore {
            dir: None,
            sinks: Mutex::new(None),
            known: Mutex::new(HashMap::new()),
        }
    }

    pub fn open(dir: &Path) -> Result<Self, OrchestratorError> {
        fs::create_dir_all(dir).map_err(|e| OrchestratorError::io(dir, e))?;
        let results_path = dir.join(RESULTS_FILE);
        let existing = if results_path.exists() {
            truncate_partial_line(&results_path)?;
            read_results(&results_path)?
        } else {
            Vec::new()
        };
        let append = |p: &Path| {
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| OrchestratorError::io(p, e))
        };
        let failures_path = dir.join(FAILURES_FILE);
        if failures_path.exists() {
            truncate_partial_line(&failures_path)?;
        }
        let sinks = Sinks {
            results: append(&results_path)?,
            failures: append(&failures_path)?,
        };
        Ok(ResultStore {
            dir: Some(dir.to_path_buf()),
            sinks: Mutex::new(Some(sinks)),
            known: Mutex::new(existing.into_iter().map(|r| (key_of(&r), r)).collect()),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.known.lock().expect("store poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lookup(&self, protocol: &str, config: &PipelineConfig, split_fingerprint: &str) -> Option<RunResult> {
        self.known
            .lock()
            .expect("store poisoned")
            .get(&(protocol.to_string(), *config, split_fingerprint.to_string()))
            .cloned()
    }

    fn write_line(&self, line: String, failures: bool) -> Result<(), OrchestratorError> {
        let mut guard = self.sinks.lock().expect("store poisoned");
        if let (Some(sinks), Some(dir)) = (guard.as_mut(), &self.dir) {
            let (file, name) = if failures {
                (&mut sinks.failures, FAILURES_FILE)
            } else {
                (&mut sinks.results, RESULTS_FILE)
            };
            file.write_all(line.as_bytes())
                .and_then(|_| file.write_all(b"\n"))
                .and_then(|_| file.flush())
                .map_err(|e| OrchestratorError::io(&dir.join(name), e))?;
        }
        Ok(())
    }

    pub fn append(&self, result: &RunResult) -> Result<(), OrchestratorError> {
        let line = serde_json::to_string(result).expect("run results serialize");
        self.write_line(line, false)?;
        self.known
            .lock()
            .expect("store poisoned")
            .insert(key_of(result), result.clone());
        Ok(())
    }

    pub fn append_failure(&self, failure: &RunFailure) -> Result<(), OrchestratorError> {
        self.write_line(serde_json::to_string(failure).expect("failures serialize"), true)
    }
}

fn truncate_partial_line(path: &Path) -> Result<(), OrchestratorError> {
    let bytes = fs::read(path).map_err(|e| OrchestratorError::io(path, e))?;
    if bytes.last().is_some_and(|&b| b != b'\n') {
        let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        log::warn!(
            "{}: dropping {} bytes of an unfinished record",
            path.display(),
            bytes.len() - keep
        );
        let f = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| OrchestratorError::io(path, e))?;
        f.set_len(keep as u64).map_err(|e| OrchestratorError::io(path, e))?;
    }
    Ok(())
}

/// Reads every run result of a `results.jsonl` file.
pub fn read_results(path: &Path) -> Result<Vec<RunResult>, OrchestratorError> {
    let file = File::open(path).map_err(|e| OrchestratorError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| OrchestratorError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| OrchestratorError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
