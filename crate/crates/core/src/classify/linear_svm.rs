use rand::seq::SliceRandom;

use crate::rng::seeded;

/// Projected-gradient tolerance shared by both SVM solvers.
pub const SVM_TOLERANCE: f64 = 1e-4;
/// Coordinate updates before the linear solver gives up.
pub const LINEAR_SVM_MAX_UPDATES: usize = 100_000;

#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// `∇ = Qα − 1` at `alpha`.
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected gradient of the box-constrained dual.
pub fn projected_gradient(alpha: &[f64], gradient: &[f64], upper: &[f64]) -> Vec<f64> {
    alpha
        .iter()
        .zip(gradient)
        .zip(upper)
        .map(|((&a, &g), &u)| {
            if a <= 0.0 {
                g.min(0.0)
            } else if a >= u {
                g.max(0.0)
            } else {
                g
            }
        })
        .collect()
}

/// Dual coordinate descent for the hinge-loss linear SVM with the bias
/// folded into the weights as a constant feature:
///
/// `min ½ αᵀQα − Σ αᵢ,  0 ≤ αᵢ ≤ upperᵢ,  Q_ij = y_i y_j (x_i·x_j + 1)`
///
/// `dot(i, j)` supplies `x_i·x_j`. Coordinates are visited in a fresh
/// seeded permutation on every pass; the solver stops once every projected
/// gradient component seen during a pass is within [`SVM_TOLERANCE`], or
/// after [`LINEAR_SVM_MAX_UPDATES`] coordinate updates.
pub fn linear_svm_dual(dot: impl Fn(usize, usize) -> f64, y: &[f64], upper: &[f64], seed: u64) -> DualSolution {
    let n = y.len();
    let mut rng = seeded(seed);
    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n];
    let diag: Vec<f64> = (0..n).map(|i| dot(i, i) + 1.0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut updates = 0;
    let mut converged = false;
    'passes: loop {
        order.shuffle(&mut rng);
        let mut worst: f64 = 0.0;
        for &i in &order {
            if updates >= LINEAR_SVM_MAX_UPDATES {
                break 'passes;
            }
            updates += 1;
            let g = grad[i];
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= upper[i] {
                g.max(0.0)
            } else {
                g
            };
            worst = worst.max(pg.abs());
            if pg.abs() <= 1e-12 {
                continue;
            }
            let next = (alpha[i] - g / diag[i]).clamp(0.0, upper[i]);
            let delta = next - alpha[i];
            if delta != 0.0 {
                alpha[i] = next;
                let s = delta * y[i];
                for j in 0..n {
                    grad[j] += s * y[j] * (dot(i, j) + 1.0);
                }
            }
        }
        if worst <= SVM_TOLERANCE {
            converged = true;
            break;
        }
    }
    DualSolution {
        alpha,
        gradient: grad,
        iterations: updates,
        converged,
    }
}
