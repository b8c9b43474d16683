use super::linear_svm::SVM_TOLERANCE;

pub const SMO_MAX_ITERATIONS: usize = 100_000;
const TAU: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// `∇ = Qα − 1`
    pub gradient: Vec<f64>,
    /// Decision function is `Σ αᵢ yᵢ K(xᵢ, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sequential minimal optimization for the kernel SVM dual
///
/// `min ½ αᵀQα − Σ αᵢ,  yᵀα = 0,  0 ≤ αᵢ ≤ upperᵢ,  Q_ij = y_i y_j K_ij`
///
/// with second-order working-set selection. `k` is the row-major `n × n`
/// kernel matrix. Stops when the maximal violating pair gap is below
/// [`SVM_TOLERANCE`] or after [`SMO_MAX_ITERATIONS`] pair updates.
pub fn smo(k: &[f64], y: &[f64], upper: &[f64]) -> SmoSolution {
    let n = y.len();
    assert_eq!(k.len(), n * n);
    let kk = |i: usize, j: usize| k[i * n + j];
    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n];
    let at_upper = |a: &[f64], i: usize| a[i] >= upper[i];
    let at_lower = |a: &[f64], i: usize| a[i] <= 0.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < SMO_MAX_ITERATIONS {
        // i: maximal −y_t ∇_t over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = if y[t] > 0.0 { !at_upper(&alpha, t) } else { !at_lower(&alpha, t) };
            if up && v >= gmax {
                gmax = v;
                i = t;
            }
        }
        // j: second-order choice over I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..n {
                let low = if y[t] > 0.0 { !at_lower(&alpha, t) } else { !at_upper(&alpha, t) };
                if !low {
                    continue;
                }
                let v = y[t] * grad[t];
                gmax2 = gmax2.max(v);
                let diff = gmax + v;
                if diff > 0.0 {
                    let quad = kk(i, i) + kk(t, t) - 2.0 * kk(i, t);
                    let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= best {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < SVM_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;

        let (ci, cj) = (upper[i], upper[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * kk(i, j);
        if y[i] != y[j] {
            let quad = (kk(i, i) + kk(j, j) + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = (kk(i, i) + kk(j, j) - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kk(i, t) * di + y[j] * kk(j, t) * dj);
        }
    }

    // offset from free vectors, or the middle of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if at_upper(&alpha, t) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower(&alpha, t) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };
    SmoSolution {
        alpha,
        gradient: grad,
        rho,
        iterations,
        converged,
    }
}
