//! Trainable pair scorers, hyperparameter search and trivial baselines.
//!
//! All solvers work on a [`TrainPool`]: the training rows, their labels and
//! a lazily computed Gram matrix. Grid search trains many models on subsets
//! of one pool, so dot products and squared distances are computed once per
//! split.

mod grid;
mod linear_svm;
mod logreg;
mod pool;
mod smo;

pub use grid::{grid_points, grid_search, GridDensity, GridOutcome, GridSpec, C_EXP_RANGE, GAMMA_EXP_RANGE};
pub use linear_svm::{linear_svm_dual, projected_gradient, DualSolution, LINEAR_SVM_MAX_UPDATES, SVM_TOLERANCE};
pub use logreg::{fit_logreg, logreg_objective, LogRegFit, LOGREG_MAX_ITERATIONS, LOGREG_TOLERANCE};
pub use pool::{Fitted, TrainPool};
pub use smo::{smo, SmoSolution, SMO_MAX_ITERATIONS};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Label;
use crate::evalstats::EvalError;
use crate::rng::{splitmix64, unit_f64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("training set is empty")]
    Empty,
    #[error("training set contains only {0:?} samples")]
    SingleClass(Label),
    #[error("non-finite feature value in training row {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("hyperparameters {0} do not apply to this classifier")]
    BadHyperParams(String),
    #[error("cross-validation fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: EvalError,
    },
    #[error("every grid point failed; first failure: {0}")]
    AllGridPointsFailed(String),
    #[error("grid search needs at least two folds, got {0}")]
    TooFewFolds(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    LinearSvm,
    RbfSvm,
    LogReg,
    #[serde(rename = "accept", alias = "alwaysaccept")]
    AlwaysAccept,
    #[serde(rename = "reject", alias = "alwaysreject")]
    AlwaysReject,
    Random,
}

impl ClassifierKind {
    /// The trainable classifiers, in report order.
    pub const TRAINABLE: [ClassifierKind; 3] = [ClassifierKind::LinearSvm, ClassifierKind::RbfSvm, ClassifierKind::LogReg];
    pub const BASELINES: [ClassifierKind; 3] = [
        ClassifierKind::AlwaysAccept,
        ClassifierKind::AlwaysReject,
        ClassifierKind::Random,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ClassifierKind::LinearSvm => "linearsvm",
            ClassifierKind::RbfSvm => "rbfsvm",
            ClassifierKind::LogReg => "logreg",
            ClassifierKind::AlwaysAccept => "accept",
            ClassifierKind::AlwaysReject => "reject",
            ClassifierKind::Random => "random",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ClassifierKind::LinearSvm => "Linear SVM",
            ClassifierKind::RbfSvm => "RBF SVM",
            ClassifierKind::LogReg => "LR",
            ClassifierKind::AlwaysAccept => "Always accept",
            ClassifierKind::AlwaysReject => "Always reject",
            ClassifierKind::Random => "Random",
        }
    }

    pub fn is_baseline(self) -> bool {
        Self::BASELINES.contains(&self)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "linearsvm" | "linear" | "svm" => ClassifierKind::LinearSvm,
            "rbfsvm" | "rbf" => ClassifierKind::RbfSvm,
            "logreg" | "lr" => ClassifierKind::LogReg,
            "accept" | "alwaysaccept" => ClassifierKind::AlwaysAccept,
            "reject" | "alwaysreject" => ClassifierKind::AlwaysReject,
            "random" => ClassifierKind::Random,
            _ => {
                return Err(format!(
                    "unknown classifier {s:?}; valid: linearsvm, rbfsvm, logreg, accept, reject, random"
                ))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    L2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeight {
    Equal,
    /// `w_c = n / (2 n_c)`
    Balanced,
}

/// One grid point. Exponents are base 2; the derived ordering (field by
/// field) is the tie-break order of the grid search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HyperParams {
    pub c_exp: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_exp: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<Penalty>,
    pub class_weight: ClassWeight,
}

impl HyperParams {
    pub fn linear(c_exp: i32, class_weight: ClassWeight) -> Self {
        HyperParams {
            c_exp,
            gamma_exp: None,
            penalty: None,
            class_weight,
        }
    }

    pub fn rbf(c_exp: i32, gamma_exp: i32, class_weight: ClassWeight) -> Self {
        HyperParams {
            c_exp,
            gamma_exp: Some(gamma_exp),
            penalty: None,
            class_weight,
        }
    }

    pub fn logreg(c_exp: i32, penalty: Penalty) -> Self {
        HyperParams {
            c_exp,
            gamma_exp: None,
            penalty: Some(penalty),
            class_weight: ClassWeight::Equal,
        }
    }

    pub fn c(&self) -> f64 {
        2f64.powi(self.c_exp)
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma_exp.map(|g| 2f64.powi(g))
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C=2^{}", self.c_exp)?;
        if let Some(g) = self.gamma_exp {
            write!(f, " gamma=2^{g}")?;
        }
        if let Some(p) = self.penalty {
            write!(f, " penalty={p:?}")?;
        }
        write!(f, " W={:?}", self.class_weight)
    }
}

/// Per-sample weights: 1 for `Equal`, `n / (2 n_c)` for `Balanced`.
pub fn sample_weights(labels: &[Label], weight: ClassWeight) -> Vec<f64> {
    match weight {
        ClassWeight::Equal => vec![1.0; labels.len()],
        ClassWeight::Balanced => {
            let n = labels.len() as f64;
            let pos = labels.iter().filter(|l| l.is_genuine()).count() as f64;
            let neg = n - pos;
            labels
                .iter()
                .map(|l| if l.is_genuine() { n / (2.0 * pos) } else { n / (2.0 * neg) })
                .collect()
        }
    }
}

/// Learned parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelParams {
    /// `score = w·x + b`
    Linear { w: Vec<f64>, b: f64 },
    /// `score = Σ coef_i exp(−γ‖s_i − x‖²) + b`
    Kernel {
        gamma: f64,
        support: Vec<Vec<f64>>,
        coef: Vec<f64>,
        b: f64,
    },
    Constant { value: f64 },
    /// Uniform scores in `[−1, 1]`, a pure function of the seed and input.
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub hyper: Option<HyperParams>,
    pub params: ModelParams,
    /// Feature dimension; 0 for baselines, which accept any input.
    pub dim: usize,
    pub converged: bool,
    pub iterations: usize,
    pub training_fingerprint: String,
}

impl TrainedModel {
    pub fn baseline(kind: ClassifierKind, seed: u64) -> Self {
        let params = match kind {
            ClassifierKind::AlwaysAccept => ModelParams::Constant { value: 1.0 },
            ClassifierKind::AlwaysReject => ModelParams::Constant { value: -1.0 },
            ClassifierKind::Random => ModelParams::Random { seed },
            other => panic!("{other} is not a baseline"),
        };
        TrainedModel {
            kind,
            hyper: None,
            params,
            dim: 0,
            converged: true,
            iterations: 0,
            training_fingerprint: String::new(),
        }
    }

    /// Decision value; higher means more likely genuine.
    pub fn score(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        if self.dim != 0 && x.len() != self.dim {
            return Err(ClassifyError::DimMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(match &self.params {
            ModelParams::Linear { w, b } => dot(w, x) + b,
            ModelParams::Kernel { gamma, support, coef, b } => {
                support
                    .iter()
                    .zip(coef)
                    .map(|(s, c)| c * (-gamma * sq_dist(s, x)).exp())
                    .sum::<f64>()
                    + b
            }
            ModelParams::Constant { value } => *value,
            ModelParams::Random { seed } => {
                let h = x.iter().fold(splitmix64(*seed), |h, v| splitmix64(h ^ v.to_bits()));
                2.0 * unit_f64(h) - 1.0
            }
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Trains `kind` on labeled rows. Baselines ignore the data.
pub fn train(
    kind: ClassifierKind,
    rows: &[&[f64]],
    labels: &[Label],
    hp: &HyperParams,
    seed: u64,
) -> Result<TrainedModel, ClassifyError> {
    if kind.is_baseline() {
        return Ok(TrainedModel::baseline(kind, seed));
    }
    let pool = TrainPool::new(rows.to_vec(), labels.to_vec())?;
    let all: Vec<usize> = (0..pool.len()).collect();
    Ok(pool.fit(kind, &all, hp, seed)?.into_model(&pool))
}
