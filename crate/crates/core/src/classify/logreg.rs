use std::collections::VecDeque;

use super::dot;

/// Relative pseudo-gradient tolerance: stop when `‖g‖ ≤ tol · max(1, ‖g₀‖)`.
pub const LOGREG_TOLERANCE: f64 = 1e-6;
pub const LOGREG_MAX_ITERATIONS: usize = 1000;
const MEMORY: usize = 10;

#[derive(Clone, Debug)]
pub struct LogRegFit {
    pub w: Vec<f64>,
    pub b: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `log(1 + e^{−m})` without overflow.
fn log1p_exp_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// `σ(−m) = 1 / (1 + e^{m})` without overflow.
fn sigmoid_neg(m: f64) -> f64 {
    if m > 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

/// Smooth part of the penalized objective and its gradient at
/// `theta = (w, b)`:
///
/// `C Σᵢ sᵢ log(1 + exp(−yᵢ(w·xᵢ + b))) + [l2] ½‖w‖²`
///
/// The bias is never penalized.
pub fn logreg_objective(
    rows: &[&[f64]],
    y: &[f64],
    weights: &[f64],
    c: f64,
    l2: bool,
    theta: &[f64],
) -> (f64, Vec<f64>) {
    let d = theta.len() - 1;
    let (w, b) = (&theta[..d], theta[d]);
    let mut f = 0.0;
    let mut g = vec![0.0; d + 1];
    for ((x, &yi), &si) in rows.iter().zip(y).zip(weights) {
        let m = yi * (dot(w, x) + b);
        f += c * si * log1p_exp_neg(m);
        let coef = -c * si * yi * sigmoid_neg(m);
        for (gk, xk) in g[..d].iter_mut().zip(x.iter()) {
            *gk += coef * xk;
        }
        g[d] += coef;
    }
    if l2 {
        f += 0.5 * dot(w, w);
        for (gk, wk) in g[..d].iter_mut().zip(w) {
            *gk += wk;
        }
    }
    (f, g)
}

/// Pseudo-gradient of `smooth + ‖w‖₁` (bias excluded from the penalty).
fn pseudo_gradient(theta: &[f64], g: &[f64], l1: bool) -> Vec<f64> {
    let d = theta.len() - 1;
    if !l1 {
        return g.to_vec();
    }
    let mut pg = g.to_vec();
    for k in 0..d {
        pg[k] = if theta[k] > 0.0 {
            g[k] + 1.0
        } else if theta[k] < 0.0 {
            g[k] - 1.0
        } else if g[k] + 1.0 < 0.0 {
            g[k] + 1.0
        } else if g[k] - 1.0 > 0.0 {
            g[k] - 1.0
        } else {
            0.0
        };
    }
    pg
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Penalized logistic regression, `C Σ sᵢ loss + R(w)` with `R = ½‖w‖²` or
/// `‖w‖₁`. Solved with limited-memory quasi-Newton steps; for the L1
/// penalty the orthant-wise variant (pseudo-gradient, sign-constrained
/// direction and orthant projection of the line search).
pub fn fit_logreg(rows: &[&[f64]], y: &[f64], weights: &[f64], c: f64, l1: bool) -> LogRegFit {
    let d = rows[0].len();
    let penalty = |t: &[f64]| if l1 { t[..d].iter().map(|v| v.abs()).sum::<f64>() } else { 0.0 };
    let eval = |t: &[f64]| {
        let (f, g) = logreg_objective(rows, y, weights, c, !l1, t);
        (f + penalty(t), g)
    };

    let mut theta = vec![0.0; d + 1];
    let (mut f, mut g) = eval(&theta);
    let mut pg = pseudo_gradient(&theta, &g, l1);
    let stop = LOGREG_TOLERANCE * norm(&pg).max(1.0);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut converged = norm(&pg) <= stop;

    while !converged && iterations < LOGREG_MAX_ITERATIONS {
        iterations += 1;
        // two-loop recursion on the pseudo-gradient
        let mut q = pg.clone();
        let mut coeffs = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(yv).for_each(|(qk, yk)| *qk -= a * yk);
            coeffs.push(a);
        }
        if let Some((s, yv, _)) = history.back() {
            let scale = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, yv, rho), a) in history.iter().zip(coeffs.iter().rev()) {
            let bcoef = rho * dot(yv, &q);
            q.iter_mut().zip(s).for_each(|(qk, sk)| *qk += (a - bcoef) * sk);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        if l1 {
            for k in 0..d {
                if dir[k] * pg[k] >= 0.0 {
                    dir[k] = 0.0;
                }
            }
        }
        if dot(&dir, &pg) >= 0.0 {
            // not a descent direction: restart from steepest descent
            history.clear();
            dir = pg.iter().map(|v| -v).collect();
        }
        let orthant: Vec<f64> = (0..=d)
            .map(|k| if theta[k] != 0.0 { theta[k].signum() } else { -pg[k].signum() })
            .collect();

        let mut step = if history.is_empty() { 1.0 / norm(&dir).max(1e-300) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let mut next: Vec<f64> = theta.iter().zip(&dir).map(|(t, dk)| t + step * dk).collect();
            if l1 {
                for k in 0..d {
                    if next[k] * orthant[k] <= 0.0 {
                        next[k] = 0.0;
                    }
                }
            }
            let (fn_, gn) = eval(&next);
            let decrease: f64 = pg.iter().zip(next.iter().zip(&theta)).map(|(p, (a, b))| p * (a - b)).sum();
            if fn_ <= f + 1e-4 * decrease {
                accepted = Some((next, fn_, gn));
                break;
            }
            step *= 0.5;
        }
        let Some((next, fn_, gn)) = accepted else {
            break;
        };
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        theta = next;
        f = fn_;
        g = gn;
        pg = pseudo_gradient(&theta, &g, l1);
        converged = norm(&pg) <= stop;
    }
    let b = theta.pop().expect("bias");
    LogRegFit {
        w: theta,
        b,
        iterations,
        converged,
    }
}
