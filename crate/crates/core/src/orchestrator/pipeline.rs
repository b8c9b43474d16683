use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PipelineConfig};
use super::features::{FeatureStore, FeatureTable};
use super::RunError;
use crate::classify::{grid_points, grid_search, GridSpec, HyperParams, TrainPool, TrainedModel};
use crate::dataset::{Domain, Label, Pair, SampleKey, SplitPlan};
use crate::evalstats::{eer_threshold, rates_at, PairScoreSet, ThresholdReport};
use crate::rng::{derive_seed, stream};
use crate::vectorops::combine_values;

/// Pipeline stage a run failure is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStage {
    Enhance,
    Embed,
    Normalize,
    Combine,
    GridSearch,
    Train,
    ScoreDev,
    Threshold,
    ScoreEval,
}

impl fmt::Display for RunStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStage::Enhance => "enhance",
            RunStage::Embed => "embed",
            RunStage::Normalize => "normalize",
            RunStage::Combine => "combine",
            RunStage::GridSearch => "grid-search",
            RunStage::Train => "train",
            RunStage::ScoreDev => "score-dev",
            RunStage::Threshold => "threshold",
            RunStage::ScoreEval => "score-eval",
        })
    }
}

/// Experiment-wide settings a single run needs.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub master_seed: u64,
    pub grid: GridSpec,
    pub classical_phase: bool,
    pub retain_scores: bool,
    /// Digest of the settings that determine results; stored with each run.
    pub protocol: String,
}

impl RunOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        RunOptions {
            master_seed: cfg.master_seed,
            grid: GridSpec::new(cfg.grid),
            classical_phase: cfg.classical_phase_correlation,
            retain_scores: cfg.retain_scores,
            protocol: cfg.protocol_fingerprint(),
        }
    }

    pub fn solver_seed(&self, split_index: usize) -> u64 {
        derive_seed(derive_seed(self.master_seed, stream::SOLVER), split_index as u64)
    }

    pub fn baseline_seed(&self, split_index: usize) -> u64 {
        derive_seed(derive_seed(self.master_seed, stream::RANDOM_BASELINE), split_index as u64)
    }
}

/// Eval-pair scores by class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalScores {
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
}

/// Outcome of one (config, split) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: PipelineConfig,
    pub split_index: usize,
    pub split_fingerprint: String,
    pub protocol: String,
    /// EER operating point on the dev pairs; its `tau` is the threshold.
    pub dev: ThresholdReport,
    /// Rates on the eval pairs at the dev threshold.
    pub eval: ThresholdReport,
    pub hyper: Option<HyperParams>,
    pub mean_cv_eer: Option<f64>,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<EvalScores>,
}

impl RunResult {
    pub fn eval_hter(&self) -> f64 {
        self.eval.hter
    }
}

/// Counts accesses to eval-pair labels and whether any happened before the
/// dev threshold was fixed.
#[derive(Debug, Default)]
pub struct LabelAudit {
    threshold_fixed: AtomicBool,
    eval_label_reads: AtomicUsize,
    reads_before_threshold: AtomicUsize,
}

impl LabelAudit {
    pub fn eval_label_reads(&self) -> usize {
        self.eval_label_reads.load(Ordering::SeqCst)
    }

    pub fn reads_before_threshold(&self) -> usize {
        self.reads_before_threshold.load(Ordering::SeqCst)
    }

    pub fn threshold_fixed(&self) -> bool {
        self.threshold_fixed.load(Ordering::SeqCst)
    }
}

/// Proof that the dev threshold has been computed; only [`fix_threshold`]
/// creates one.
struct FixedThreshold {
    tau: f64,
}

fn fix_threshold(dev: &ThresholdReport, audit: &LabelAudit) -> FixedThreshold {
    audit.threshold_fixed.store(true, Ordering::SeqCst);
    FixedThreshold { tau: dev.tau }
}

/// Eval labels, readable only with a [`FixedThreshold`].
struct SealedLabels(Vec<Label>);

impl SealedLabels {
    fn open<'a>(&'a self, _proof: &FixedThreshold, audit: &LabelAudit) -> &'a [Label] {
        if !audit.threshold_fixed() {
            audit.reads_before_threshold.fetch_add(self.0.len(), Ordering::SeqCst);
        }
        audit.eval_label_reads.fetch_add(self.0.len(), Ordering::SeqCst);
        &self.0
    }
}

fn combined(
    table: &FeatureTable,
    pairs: &[Pair],
    config: &PipelineConfig,
    opts: &RunOptions,
) -> Result<Vec<Vec<f64>>, RunError> {
    pairs
        .iter()
        .map(|p| {
            let a = table.get(&SampleKey::new(p.id_subject.clone(), Domain::IdDocument))?;
            let b = table.get(&SampleKey::new(p.selfie_subject.clone(), Domain::Selfie))?;
            combine_values(a, b, config.combination, opts.classical_phase).map_err(|e| {
                RunError::new(
                    RunStage::Combine,
                    format!("pair ({}, {}): {e}", p.id_subject, p.selfie_subject),
                )
            })
        })
        .collect()
}

fn score_all(model: &TrainedModel, rows: &[Vec<f64>], stage: RunStage) -> Result<Vec<f64>, RunError> {
    rows.iter()
        .map(|x| {
            let s = model.score(x).map_err(|e| RunError::new(stage, e))?;
            if s.is_finite() {
                Ok(s)
            } else {
                Err(RunError::new(stage, "non-finite score"))
            }
        })
        .collect()
}

/// Indices (into the train pairs) of the pairs generated within each CV
/// fold.
fn fold_indices(split: &SplitPlan) -> Vec<Vec<usize>> {
    let fold_of: HashMap<&str, usize> = split
        .cv_folds
        .iter()
        .enumerate()
        .flat_map(|(f, subjects)| subjects.iter().map(move |s| (s.as_str(), f)))
        .collect();
    let mut folds = vec![Vec::new(); split.cv_folds.len()];
    for (i, p) in split.train_pairs.iter().enumerate() {
        let (a, b) = (fold_of.get(p.id_subject.as_str()), fold_of.get(p.selfie_subject.as_str()));
        if let (Some(&a), Some(&b)) = (a, b) {
            if a == b {
                folds[a].push(i);
            }
        }
    }
    folds
}

struct Trained {
    model: TrainedModel,
    mean_cv_eer: Option<f64>,
}

fn train_stage(
    table: &FeatureTable,
    config: &PipelineConfig,
    split: &SplitPlan,
    split_index: usize,
    opts: &RunOptions,
) -> Result<Trained, RunError> {
    let kind = config.classifier;
    if kind.is_baseline() {
        return Ok(Trained {
            model: TrainedModel::baseline(kind, opts.baseline_seed(split_index)),
            mean_cv_eer: None,
        });
    }
    let rows = combined(table, &split.train_pairs, config, opts)?;
    let labels: Vec<Label> = split.train_pairs.iter().map(|p| p.label).collect();
    let pool = TrainPool::new(rows.iter().map(Vec::as_slice).collect(), labels)
        .map_err(|e| RunError::new(RunStage::Train, e))?;
    let seed = opts.solver_seed(split_index);
    let outcome = grid_search(kind, &pool, &fold_indices(split), &grid_points(kind, &opts.grid), seed)
        .map_err(|e| RunError::new(RunStage::GridSearch, e))?;
    let all: Vec<usize> = (0..pool.len()).collect();
    let fitted = pool
        .fit(kind, &all, &outcome.best, seed)
        .map_err(|e| RunError::new(RunStage::Train, e))?;
    if !fitted.converged {
        log::warn!(
            "{config} split {split_index}: solver stopped at the iteration cap ({} iterations)",
            fitted.iterations
        );
    }
    Ok(Trained {
        model: fitted.into_model(&pool),
        mean_cv_eer: Some(outcome.mean_cv_eer),
    })
}

/// Runs `config` on one split: features → per-pair combination →
/// hyperparameter search on the train folds → final training on all train
/// pairs → EER threshold on dev → HTER on eval at that threshold.
pub fn run_single(
    store: &FeatureStore,
    config: &PipelineConfig,
    split: &SplitPlan,
    split_index: usize,
    opts: &RunOptions,
) -> Result<RunResult, RunError> {
    run_single_audited(store, config, split, split_index, opts, &LabelAudit::default())
}

/// [`run_single`] recording every access to eval labels in `audit`.
pub fn run_single_audited(
    store: &FeatureStore,
    config: &PipelineConfig,
    split: &SplitPlan,
    split_index: usize,
    opts: &RunOptions,
    audit: &LabelAudit,
) -> Result<RunResult, RunError> {
    let eval_pairs: Vec<Pair> = split
        .eval_pairs
        .iter()
        .map(|p| Pair {
            label: Label::Impostor,
            ..p.clone()
        })
        .collect();
    let sealed = SealedLabels(split.eval_pairs.iter().map(|p| p.label).collect());

    let table = store.table(config.enhancement, config.layer, config.normalization)?;
    let trained = train_stage(&table, config, split, split_index, opts)?;

    let dev_rows = combined(&table, &split.dev_pairs, config, opts)?;
    let dev_scores = score_all(&trained.model, &dev_rows, RunStage::ScoreDev)?;
    let dev_set = PairScoreSet::new(dev_scores.into_iter().zip(split.dev_pairs.iter().map(|p| p.label)))
        .map_err(|e| RunError::new(RunStage::Threshold, e))?;
    let dev = eer_threshold(&dev_set);
    let threshold = fix_threshold(&dev, audit);

    let eval_rows = combined(&table, &eval_pairs, config, opts)?;
    let eval_scores = score_all(&trained.model, &eval_rows, RunStage::ScoreEval)?;
    let labels = sealed.open(&threshold, audit);
    let eval_set = PairScoreSet::new(eval_scores.into_iter().zip(labels.iter().copied()))
        .map_err(|e| RunError::new(RunStage::ScoreEval, e))?;
    let eval = rates_at(&eval_set, threshold.tau);

    Ok(RunResult {
        config: *config,
        split_index,
        split_fingerprint: split.fingerprint(),
        protocol: opts.protocol.clone(),
        dev,
        eval,
        hyper: trained.model.hyper,
        mean_cv_eer: trained.mean_cv_eer,
        converged: trained.model.converged,
        scores: opts.retain_scores.then(|| EvalScores {
            genuine: eval_set.genuine().to_vec(),
            impostor: eval_set.impostor().to_vec(),
        }),
    })
}
