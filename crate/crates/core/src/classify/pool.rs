use std::sync::OnceLock;

use super::linear_svm::linear_svm_dual;
use super::logreg::fit_logreg;
use super::smo::smo;
use super::{dot, sample_weights, ClassifierKind, ClassifyError, HyperParams, ModelParams, Penalty, TrainedModel};
use crate::dataset::Label;
use crate::rng::splitmix64;

/// Training rows with labels and a lazily computed Gram matrix.
pub struct TrainPool<'a> {
    rows: Vec<&'a [f64]>,
    labels: Vec<Label>,
    dim: usize,
    gram: OnceLock<Vec<f64>>,
}

impl<'a> TrainPool<'a> {
    pub fn new(rows: Vec<&'a [f64]>, labels: Vec<Label>) -> Result<Self, ClassifyError> {
        if rows.len() != labels.len() {
            return Err(ClassifyError::LengthMismatch {
                rows: rows.len(),
                labels: labels.len(),
            });
        }
        let dim = rows.first().ok_or(ClassifyError::Empty)?.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(ClassifyError::DimMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(ClassifyError::NonFinite(i));
            }
        }
        Ok(TrainPool {
            rows,
            labels,
            dim,
            gram: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows[i]
    }

    fn gram(&self) -> &[f64] {
        self.gram.get_or_init(|| {
            let n = self.rows.len();
            let mut g = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = dot(self.rows[i], self.rows[j]);
                    g[i * n + j] = v;
                    g[j * n + i] = v;
                }
            }
            g
        })
    }

    /// `x_i · x_j`
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        self.gram()[i * self.rows.len() + j]
    }

    /// `‖x_i − x_j‖²` from the Gram matrix, clamped at 0.
    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        (self.dot(i, i) + self.dot(j, j) - 2.0 * self.dot(i, j)).max(0.0)
    }

    /// Order-sensitive 64-bit digest of the rows at `idx` and their labels.
    pub fn fingerprint(&self, idx: &[usize]) -> String {
        let mut h = splitmix64(idx.len() as u64);
        for &i in idx {
            h = splitmix64(h ^ self.labels[i].is_genuine() as u64);
            for v in self.rows[i] {
                h = splitmix64(h ^ v.to_bits());
            }
        }
        format!("{h:016x}")
    }

    /// Trains on the subset `idx`.
    pub fn fit(&self, kind: ClassifierKind, idx: &[usize], hp: &HyperParams, seed: u64) -> Result<Fitted, ClassifyError> {
        if idx.is_empty() {
            return Err(ClassifyError::Empty);
        }
        let labels: Vec<Label> = idx.iter().map(|&i| self.labels[i]).collect();
        if labels.iter().all(|l| *l == labels[0]) {
            return Err(ClassifyError::SingleClass(labels[0]));
        }
        let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let weights = sample_weights(&labels, hp.class_weight);
        let bad = || ClassifyError::BadHyperParams(hp.to_string());
        let c = hp.c();
        let upper: Vec<f64> = weights.iter().map(|w| c * w).collect();
        let kernel = match kind {
            ClassifierKind::LinearSvm => {
                if hp.gamma_exp.is_some() || hp.penalty.is_some() {
                    return Err(bad());
                }
                let sol = linear_svm_dual(|a, b| self.dot(idx[a], idx[b]), &y, &upper, seed);
                let coef: Vec<f64> = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).collect();
                let b = coef.iter().sum();
                return Ok(Fitted::new_dual(kind, *hp, idx, coef, None, b, sol.converged, sol.iterations));
            }
            ClassifierKind::RbfSvm => {
                let gamma = hp.gamma().ok_or_else(bad)?;
                if hp.penalty.is_some() {
                    return Err(bad());
                }
                gamma
            }
            ClassifierKind::LogReg => {
                let penalty = hp.penalty.ok_or_else(bad)?;
                if hp.gamma_exp.is_some() {
                    return Err(bad());
                }
                let rows: Vec<&[f64]> = idx.iter().map(|&i| self.rows[i]).collect();
                let fit = fit_logreg(&rows, &y, &weights, c, penalty == Penalty::L1);
                return Ok(Fitted {
                    kind,
                    hyper: *hp,
                    converged: fit.converged,
                    iterations: fit.iterations,
                    idx: idx.to_vec(),
                    form: Form::Primal { w: fit.w, b: fit.b },
                });
            }
            other => panic!("{other} is not trainable"),
        };
        let n = idx.len();
        let mut k = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let v = (-kernel * self.sq_dist(idx[a], idx[b])).exp();
                k[a * n + b] = v;
                k[b * n + a] = v;
            }
        }
        let sol = smo(&k, &y, &upper);
        let coef: Vec<f64> = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).collect();
        Ok(Fitted::new_dual(kind, *hp, idx, coef, Some(kernel), -sol.rho, sol.converged, sol.iterations))
    }
}

#[derive(Clone, Debug)]
enum Form {
    /// Expansion over pool rows: linear (`x_i·x + 1`) or RBF kernel.
    Dual {
        coef: Vec<f64>,
        gamma: Option<f64>,
        b: f64,
    },
    Primal {
        w: Vec<f64>,
        b: f64,
    },
}

/// A model trained on a subset of a [`TrainPool`], able to score other pool
/// rows from cached products.
#[derive(Clone, Debug)]
pub struct Fitted {
    pub kind: ClassifierKind,
    pub hyper: HyperParams,
    pub converged: bool,
    pub iterations: usize,
    idx: Vec<usize>,
    form: Form,
}

impl Fitted {
    #[allow(clippy::too_many_arguments)]
    fn new_dual(
        kind: ClassifierKind,
        hyper: HyperParams,
        idx: &[usize],
        coef: Vec<f64>,
        gamma: Option<f64>,
        b: f64,
        converged: bool,
        iterations: usize,
    ) -> Self {
        // linear: w·x + b with b = Σ coef, i.e. Σ coef (x_i·x) + Σ coef
        Fitted {
            kind,
            hyper,
            converged,
            iterations,
            idx: idx.to_vec(),
            form: Form::Dual { coef, gamma, b },
        }
    }

    /// Decision value of pool row `j`.
    pub fn score_pool(&self, pool: &TrainPool, j: usize) -> f64 {
        match &self.form {
            Form::Dual { coef, gamma: None, b } => {
                self.idx.iter().zip(coef).map(|(&i, c)| c * pool.dot(i, j)).sum::<f64>() + b
            }
            Form::Dual { coef, gamma: Some(g), b } => {
                self.idx
                    .iter()
                    .zip(coef)
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(&i, c)| c * (-g * pool.sq_dist(i, j)).exp())
                    .sum::<f64>()
                    + b
            }
            Form::Primal { w, b } => dot(w, pool.row(j)) + b,
        }
    }

    pub fn into_model(self, pool: &TrainPool) -> TrainedModel {
        let params = match self.form {
            Form::Dual { coef, gamma: None, b } => {
                let mut w = vec![0.0; pool.dim()];
                for (&i, c) in self.idx.iter().zip(&coef) {
                    if *c != 0.0 {
                        for (wk, xk) in w.iter_mut().zip(pool.row(i)) {
                            *wk += c * xk;
                        }
                    }
                }
                ModelParams::Linear { w, b }
            }
            Form::Dual { coef, gamma: Some(gamma), b } => {
                let (support, coef): (Vec<Vec<f64>>, Vec<f64>) = self
                    .idx
                    .iter()
                    .zip(&coef)
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(&i, &c)| (pool.row(i).to_vec(), c))
                    .unzip();
                ModelParams::Kernel { gamma, support, coef, b }
            }
            Form::Primal { w, b } => ModelParams::Linear { w, b },
        };
        TrainedModel {
            kind: self.kind,
            hyper: Some(self.hyper),
            params,
            dim: pool.dim(),
            converged: self.converged,
            iterations: self.iterations,
            training_fingerprint: pool.fingerprint(&self.idx),
        }
    }
}
