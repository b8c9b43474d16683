use std::collections::BTreeMap;
use std::sync::Mutex;

use rayon::prelude::*;

use super::config::{DatasetSource, ExperimentConfig, PipelineConfig};
use super::features::FeatureStore;
use super::pipeline::{run_single, RunOptions, RunResult};
use super::store::{ResultStore, RunFailure};
use super::{OrchestratorError, RunError};
use crate::dataset::{
    index_samples, ingest_manifest, plan_many_splits, split_list_fingerprint, subject_ids, synthesize_dataset,
    FaceSample, SplitPlan,
};
use crate::evalstats::{summarize, Summary};
use crate::rng::{derive_seed, stream};

pub fn load_dataset(source: &DatasetSource) -> Result<Vec<FaceSample>, OrchestratorError> {
    let samples = match source {
        DatasetSource::Manifest(path) => ingest_manifest(path)?,
        DatasetSource::Synthetic { n_subjects, seed, shift } => synthesize_dataset(*n_subjects, *seed, shift)?,
    };
    index_samples(&samples)?;
    Ok(samples)
}

/// All runs of one pipeline over the split list.
#[derive(Clone, Debug)]
pub struct ConfigOutcome {
    pub config: PipelineConfig,
    /// Successful runs in split order.
    pub results: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
    /// Statistics of the eval HTERs of the successful runs.
    pub summary: Summary,
}

impl ConfigOutcome {
    pub fn hters(&self) -> Vec<f64> {
        self.results.iter().map(RunResult::eval_hter).collect()
    }
}

/// Finished runs waiting to be persisted in split order, so that the
/// results file does not depend on worker scheduling.
struct OrderedSink<'a> {
    store: &'a ResultStore,
    next: usize,
    slots: Vec<Option<Result<RunResult, RunFailure>>>,
    persisted: Vec<bool>,
    error: Option<OrchestratorError>,
}

impl OrderedSink<'_> {
    fn complete(&mut self, i: usize, outcome: Result<RunResult, RunFailure>) {
        self.slots[i] = Some(outcome);
        while self.next < self.slots.len() {
            let Some(outcome) = &self.slots[self.next] else { break };
            if !self.persisted[self.next] && self.error.is_none() {
                let written = match outcome {
                    Ok(r) => self.store.append(r),
                    Err(f) => self.store.append_failure(f),
                };
                if let Err(e) = written {
                    self.error = Some(e);
                }
                self.persisted[self.next] = true;
            }
            self.next += 1;
        }
    }
}

/// A dataset, its cached features, the shared split list and a result
/// store, plus a bounded worker pool for runs.
pub struct Experiment {
    config: ExperimentConfig,
    features: FeatureStore,
    splits: Vec<SplitPlan>,
    split_fingerprints: Vec<String>,
    split_list_fingerprint: String,
    results: ResultStore,
    options: RunOptions,
    pool: rayon::ThreadPool,
}

impl Experiment {
    /// Loads the dataset and opens the result store in `output_dir`.
    pub fn open(config: ExperimentConfig) -> Result<Self, OrchestratorError> {
        let samples = load_dataset(&config.dataset)?;
        let store = ResultStore::open(&config.output_dir)?;
        Experiment::new(config, samples, store)
    }

    /// Experiment whose results stay in memory.
    pub fn in_memory(config: ExperimentConfig) -> Result<Self, OrchestratorError> {
        let samples = load_dataset(&config.dataset)?;
        Experiment::new(config, samples, ResultStore::in_memory())
    }

    pub fn new(config: ExperimentConfig, samples: Vec<FaceSample>, results: ResultStore) -> Result<Self, OrchestratorError> {
        config.validate()?;
        let subjects = subject_ids(&samples);
        let splits = plan_many_splits(&subjects, derive_seed(config.master_seed, stream::SPLITS), config.n_splits)?;
        let split_fingerprints = splits.iter().map(SplitPlan::fingerprint).collect();
        let split_list_fingerprint = split_list_fingerprint(&splits);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| OrchestratorError::Config(format!("worker pool: {e}")))?;
        let features = FeatureStore::new(
            samples,
            config.embeddings.clone(),
            config.enhancement_params.clone(),
            config.surrogate_seed,
        );
        Ok(Experiment {
            options: RunOptions::from_config(&config),
            config,
            features,
            splits,
            split_fingerprints,
            split_list_fingerprint,
            results,
            pool,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn splits(&self) -> &[SplitPlan] {
        &self.splits
    }

    /// Digest of the ordered split list shared by every configuration.
    pub fn split_list_fingerprint(&self) -> &str {
        &self.split_list_fingerprint
    }

    pub fn features(&self) -> &FeatureStore {
        &self.features
    }

    pub fn results(&self) -> &ResultStore {
        &self.results
    }

    pub fn options(&self) -> &RunOptions {
        &self.options
    }

    /// Runs `pipeline` on every split (reusing stored results) and
    /// summarizes the eval HTERs. Individual failures are recorded; fewer
    /// than 90% successful runs is an error.
    pub fn run_config(&self, pipeline: &PipelineConfig) -> Result<ConfigOutcome, OrchestratorError> {
        let n = self.splits.len();
        let mut sink = OrderedSink {
            store: &self.results,
            next: 0,
            slots: vec![None; n],
            persisted: vec![false; n],
            error: None,
        };
        let mut todo = Vec::new();
        for (i, fp) in self.split_fingerprints.iter().enumerate() {
            match self.results.lookup(&self.options.protocol, pipeline, fp) {
                Some(r) => {
                    sink.slots[i] = Some(Ok(r));
                    sink.persisted[i] = true;
                }
                None => todo.push(i),
            }
        }
        if !todo.is_empty() {
            log::info!("{pipeline}: {} of {n} runs to execute", todo.len());
            let fail = |i: usize, e: RunError| RunFailure {
                config: *pipeline,
                split_index: i,
                split_fingerprint: self.split_fingerprints[i].clone(),
                stage: e.stage,
                message: e.message,
            };
            let warm = self.pool.install(|| {
                self.features
                    .table(pipeline.enhancement, pipeline.layer, pipeline.normalization)
            });
            match warm {
                Err(e) => todo.iter().for_each(|&i| sink.complete(i, Err(fail(i, e.clone())))),
                Ok(_) => {
                    let sink = Mutex::new(&mut sink);
                    self.pool.install(|| {
                        todo.par_iter().for_each(|&i| {
                            let out = run_single(&self.features, pipeline, &self.splits[i], i, &self.options)
                                .map_err(|e| fail(i, e));
                            if let Err(f) = &out {
                                log::warn!("{pipeline} split {i}: {} stage: {}", f.stage, f.message);
                            }
                            sink.lock().expect("sink poisoned").complete(i, out);
                        })
                    });
                }
            }
            if let Some(e) = sink.error.take() {
                return Err(e);
            }
        }

        let mut results = Vec::with_capacity(n);
        let mut failures = Vec::new();
        for slot in sink.slots {
            match slot.expect("every split ran") {
                Ok(r) => results.push(r),
                Err(f) => failures.push(f),
            }
        }
        if results.len() * 10 < n * 9 {
            return Err(OrchestratorError::TooManyFailures {
                config: pipeline.key(),
                succeeded: results.len(),
                total: n,
                first: failures
                    .first()
                    .map(|f| format!("split {}: {} stage: {}", f.split_index, f.stage, f.message))
                    .unwrap_or_default(),
            });
        }
        let hters: Vec<f64> = results.iter().map(RunResult::eval_hter).collect();
        let summary = summarize(&hters)?;
        Ok(ConfigOutcome {
            config: *pipeline,
            results,
            failures,
            summary,
        })
    }

    /// Runs several pipelines, returning outcomes keyed by pipeline.
    pub fn run_many(
        &self,
        pipelines: &[PipelineConfig],
    ) -> Result<BTreeMap<PipelineConfig, ConfigOutcome>, OrchestratorError> {
        pipelines.iter().map(|p| Ok((*p, self.run_config(p)?))).collect()
    }
}
