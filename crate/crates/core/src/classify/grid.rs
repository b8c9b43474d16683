use serde::{Deserialize, Serialize};

use super::{ClassWeight, ClassifierKind, ClassifyError, HyperParams, Penalty, TrainPool};
use crate::evalstats::{eer_threshold, PairScoreSet};

/// Inclusive base-2 exponent range searched for `C`.
pub const C_EXP_RANGE: (i32, i32) = (-25, 10);
/// Inclusive base-2 exponent range searched for `γ`.
pub const GAMMA_EXP_RANGE: (i32, i32) = (-25, 10);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridDensity {
    /// Every fifth exponent: 8 values per axis.
    #[default]
    Coarse,
    /// Every exponent: 36 values per axis.
    Full,
}

impl GridDensity {
    pub fn stride(self) -> usize {
        match self {
            GridDensity::Coarse => 5,
            GridDensity::Full => 1,
        }
    }
}

impl std::str::FromStr for GridDensity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "coarse" => Ok(GridDensity::Coarse),
            "full" => Ok(GridDensity::Full),
            _ => Err(format!("unknown grid {s:?}; valid: coarse, full")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c_exponents: Vec<i32>,
    pub gamma_exponents: Vec<i32>,
}

impl GridSpec {
    pub fn new(density: GridDensity) -> Self {
        let axis = |(lo, hi): (i32, i32)| (lo..=hi).step_by(density.stride()).collect();
        GridSpec {
            c_exponents: axis(C_EXP_RANGE),
            gamma_exponents: axis(GAMMA_EXP_RANGE),
        }
    }
}

/// All grid points for `kind` in ascending tie-break order. Baselines have
/// no grid.
pub fn grid_points(kind: ClassifierKind, spec: &GridSpec) -> Vec<HyperParams> {
    let weights = [ClassWeight::Equal, ClassWeight::Balanced];
    let mut points: Vec<HyperParams> = match kind {
        ClassifierKind::LinearSvm => spec
            .c_exponents
            .iter()
            .flat_map(|&c| weights.map(|w| HyperParams::linear(c, w)))
            .collect(),
        ClassifierKind::RbfSvm => spec
            .c_exponents
            .iter()
            .flat_map(|&c| {
                spec.gamma_exponents
                    .iter()
                    .flat_map(move |&g| weights.map(|w| HyperParams::rbf(c, g, w)))
            })
            .collect(),
        ClassifierKind::LogReg => spec
            .c_exponents
            .iter()
            .flat_map(|&c| [Penalty::L1, Penalty::L2].map(|p| HyperParams::logreg(c, p)))
            .collect(),
        _ => Vec::new(),
    };
    points.sort();
    points
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEval {
    pub hyper: HyperParams,
    pub mean_cv_eer: Option<f64>,
    pub fold_eers: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub best: HyperParams,
    pub mean_cv_eer: f64,
    pub evaluated: Vec<GridEval>,
}

/// Subject-fold cross-validation over `points`.
///
/// `folds[f]` lists the pool indices of the pairs generated within fold
/// `f`. For each point and fold, a model is trained on the other folds'
/// pairs and the EER of fold `f` is measured; the point with the smallest
/// mean EER wins, ties going to the smallest point. Points whose training
/// or evaluation fails are recorded and skipped.
pub fn grid_search(
    kind: ClassifierKind,
    pool: &TrainPool,
    folds: &[Vec<usize>],
    points: &[HyperParams],
    seed: u64,
) -> Result<GridOutcome, ClassifyError> {
    if folds.len() < 2 {
        return Err(ClassifyError::TooFewFolds(folds.len()));
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut evaluated = Vec::with_capacity(sorted.len());
    let mut best: Option<(f64, HyperParams)> = None;
    for hp in sorted {
        match cv_eers(kind, pool, folds, &hp, seed) {
            Ok(eers) => {
                let mean = eers.iter().sum::<f64>() / eers.len() as f64;
                if best.map_or(true, |(b, _)| mean < b) {
                    best = Some((mean, hp));
                }
                evaluated.push(GridEval {
                    hyper: hp,
                    mean_cv_eer: Some(mean),
                    fold_eers: eers,
                    error: None,
                });
            }
            Err(e) => evaluated.push(GridEval {
                hyper: hp,
                mean_cv_eer: None,
                fold_eers: Vec::new(),
                error: Some(e.to_string()),
            }),
        }
    }
    match best {
        Some((mean_cv_eer, best)) => Ok(GridOutcome {
            best,
            mean_cv_eer,
            evaluated,
        }),
        None => Err(ClassifyError::AllGridPointsFailed(
            evaluated
                .iter()
                .find_map(|e| e.error.clone())
                .unwrap_or_else(|| "empty grid".into()),
        )),
    }
}

fn cv_eers(
    kind: ClassifierKind,
    pool: &TrainPool,
    folds: &[Vec<usize>],
    hp: &HyperParams,
    seed: u64,
) -> Result<Vec<f64>, ClassifyError> {
    let mut eers = Vec::with_capacity(folds.len());
    for (f, held_out) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let model = pool.fit(kind, &train, hp, seed)?;
        let scores = PairScoreSet::new(held_out.iter().map(|&j| (model.score_pool(pool, j), pool.labels()[j])))
            .map_err(|source| ClassifyError::Fold { fold: f, source })?;
        eers.push(eer_threshold(&scores).hter);
    }
    Ok(eers)
}
