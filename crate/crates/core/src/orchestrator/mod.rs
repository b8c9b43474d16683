//! Experiment protocol: per-split runs, multi-split configuration runs,
//! greedy stage-by-stage pipeline optimization, result persistence and
//! reporting.
//!
//! An [`Experiment`] owns the dataset, the cached features, the shared split
//! list and the append-only result store. [`Experiment::run_config`]
//! evaluates one [`PipelineConfig`] on every split and
//! [`Experiment::greedy`] walks the five stages, keeping the technique with
//! the lowest median eval HTER at each one.

mod config;
mod experiment;
mod features;
mod greedy;
mod pipeline;
mod report;
mod store;

pub use config::{
    external_path, parse_external_key, BuiltinEmbedder, DatasetSource, EmbeddingSource, EnhancementParams,
    ExperimentConfig, PipelineConfig, Stage, StageChoice, StageMenus,
};
pub use experiment::{load_dataset, ConfigOutcome, Experiment};
pub use features::{FeatureStore, FeatureTable};
pub use greedy::{CandidateResult, OptimizationReport, StageReport};
pub use pipeline::{run_single, run_single_audited, EvalScores, LabelAudit, RunOptions, RunResult, RunStage};
pub use report::{
    dunn_table, median_run, render_report, summary_table, write_det_for_run, write_reports, SUMMARY_COLUMNS,
};
pub use store::{read_results, ResultStore, RunFailure, FAILURES_FILE, RESULTS_FILE};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::embedding::EmbeddingError;
use crate::evalstats::EvalError;

/// A failed run, tagged with the pipeline stage that failed.
#[derive(Clone, Debug, Error, PartialEq)]
#[error("{stage} stage: {message}")]
pub struct RunError {
    pub stage: RunStage,
    pub message: String,
}

impl RunError {
    pub fn new(stage: RunStage, message: impl ToString) -> Self {
        RunError {
            stage,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("{config}: only {succeeded} of {total} runs succeeded (90% required); first failure: {first}")]
    TooManyFailures {
        config: String,
        succeeded: usize,
        total: usize,
        first: String,
    },
    #[error("statistics: {0}")]
    Stats(#[from] EvalError),
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("no results for {0}")]
    NoResults(String),
}

impl OrchestratorError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        OrchestratorError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
