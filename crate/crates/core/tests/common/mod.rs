//! Independent reference implementations shared by the integration tests
//! and the acceptance target. Nothing here calls into the library's
//! numerical code.
#![allow(dead_code)]

/// Operating point with accept rule `score ≥ tau`, computed by counting.
pub fn rates_by_count(genuine: &[f64], impostor: &[f64], tau: f64) -> (f64, f64) {
    let far = impostor.iter().filter(|&&s| s >= tau).count() as f64 / impostor.len() as f64;
    let frr = genuine.iter().filter(|&&s| s < tau).count() as f64 / genuine.len() as f64;
    (far, frr)
}

/// Sweeps every score value and +∞ as a threshold and returns the
/// (|FAR − FRR|, FAR + FRR) minimum in lexicographic order, with its rates.
pub fn eer_sweep(genuine: &[f64], impostor: &[f64]) -> (f64, f64) {
    let mut taus: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    taus.push(f64::INFINITY);
    let mut best = (f64::INFINITY, f64::INFINITY, 0.0, 0.0);
    for tau in taus {
        let (far, frr) = rates_by_count(genuine, impostor, tau);
        let gap = (far - frr).abs();
        let total = far + frr;
        let better = gap < best.0 - 1e-12 || ((gap - best.0).abs() <= 1e-12 && total < best.1 - 1e-12);
        if better {
            best = (gap, total, far, frr);
        }
    }
    (best.2, best.3)
}

/// Average rank of `v` within `pooled`: (#smaller) + (#equal + 1) / 2.
fn rank_of(v: f64, pooled: &[f64]) -> f64 {
    let less = pooled.iter().filter(|&&x| x < v).count() as f64;
    let equal = pooled.iter().filter(|&&x| x == v).count() as f64;
    less + (equal + 1.0) / 2.0
}

fn tie_sum(pooled: &[f64]) -> f64 {
    let mut seen: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    for &v in pooled {
        if !seen.contains(&v) {
            seen.push(v);
            let t = pooled.iter().filter(|&&x| x == v).count() as f64;
            sum += t * t * t - t;
        }
    }
    sum
}

/// Tie-corrected Kruskal–Wallis H by quadratic-time ranking.
pub fn kruskal_h(groups: &[Vec<f64>]) -> f64 {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let mean_rank = (n + 1.0) / 2.0;
    let between: f64 = groups
        .iter()
        .map(|g| {
            let r = g.iter().map(|&v| rank_of(v, &pooled)).sum::<f64>() / g.len() as f64;
            g.len() as f64 * (r - mean_rank).powi(2)
        })
        .sum();
    let h = 12.0 / (n * (n + 1.0)) * between;
    let correction = 1.0 - tie_sum(&pooled) / (n * n * n - n);
    if correction <= 0.0 {
        0.0
    } else {
        h / correction
    }
}

/// Chi-square survival function for an even number of degrees of freedom:
/// `e^{−x/2} Σ_{i<df/2} (x/2)^i / i!`.
pub fn chi2_sf_even(x: f64, df: usize) -> f64 {
    assert!(df % 2 == 0 && df > 0);
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 0.0;
    for i in 0..df / 2 {
        if i > 0 {
            term *= half / i as f64;
        }
        sum += term;
    }
    (-half).exp() * sum
}

/// Standard normal CDF by Simpson integration of the density.
pub fn phi(z: f64) -> f64 {
    let a = z.abs().min(12.0);
    let n = 4000;
    let h = a / n as f64;
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(a);
    for i in 1..n {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let half_area = s * h / 3.0;
    if z >= 0.0 {
        0.5 + half_area
    } else {
        0.5 - half_area
    }
}

/// Bonferroni-adjusted two-sided Dunn p-value between groups `i` and `j`.
pub fn dunn_p(groups: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let mean = |g: &Vec<f64>| g.iter().map(|&v| rank_of(v, &pooled)).sum::<f64>() / g.len() as f64;
    let var = n * (n + 1.0) / 12.0 - tie_sum(&pooled) / (12.0 * (n - 1.0));
    let se = (var * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
    let diff = (mean(&groups[i]) - mean(&groups[j])).abs();
    let raw = if diff == 0.0 { 1.0 } else { 2.0 * (1.0 - phi(diff / se)) };
    let k = groups.len() as f64;
    (raw * k * (k - 1.0) / 2.0).min(1.0)
}

/// Cross-correlation over non-negative lags by a double loop.
pub fn cross_corr(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = a.len();
    let mut c = vec![0.0; d];
    for (k, ck) in c.iter_mut().enumerate() {
        for j in 0..d - k {
            *ck += a[j] * b[j + k];
        }
    }
    c
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exact minimizer of `½αᵀQα − Σα` over `0 ≤ α ≤ upper` with
/// `Q_ij = y_i y_j (x_i·x_j + 1)`, by enumerating all `3^n` faces of the
/// box (each coordinate at 0, at its bound, or free) and keeping the best
/// feasible stationary point. Returns `(α, objective)`.
pub fn box_qp_bruteforce(x: &[Vec<f64>], y: &[f64], upper: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| y[i] * y[j] * (x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>() + 1.0))
                .collect()
        })
        .collect();
    let objective =
        |a: &[f64]| 0.5 * (0..n).map(|i| (0..n).map(|j| a[i] * q[i][j] * a[j]).sum::<f64>()).sum::<f64>() - a.iter().sum::<f64>();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let mut alpha: Vec<f64> = state.iter().zip(upper).map(|(&s, &u)| if s == 1 { u } else { 0.0 }).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        if !free.is_empty() {
            let a: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| q[i][j]).collect()).collect();
            let rhs: Vec<f64> = free
                .iter()
                .map(|&i| 1.0 - (0..n).filter(|j| state[*j] != 2).map(|j| q[i][j] * alpha[j]).sum::<f64>())
                .collect();
            let Some(sol) = solve(a, rhs) else { continue };
            if sol.iter().zip(&free).any(|(&v, &i)| v < -1e-12 || v > upper[i] + 1e-12) {
                continue;
            }
            for (&i, v) in free.iter().zip(sol) {
                alpha[i] = v.clamp(0.0, upper[i]);
            }
        }
        let f = objective(&alpha);
        if best.as_ref().map_or(true, |(_, b)| f < *b) {
            best = Some((alpha, f));
        }
    }
    best.expect("the origin is always feasible")
}

/// `(w, b)` of the folded-bias primal from dual variables.
pub fn primal_from_dual(x: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> (Vec<f64>, f64) {
    let d = x[0].len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for ((xi, &yi), &ai) in x.iter().zip(y).zip(alpha) {
        for (wk, xk) in w.iter_mut().zip(xi) {
            *wk += ai * yi * xk;
        }
        b += ai * yi;
    }
    (w, b)
}

/// Dual objective of `(w, b)` written through the primal variables:
/// `½(‖w‖² + b²) − Σα`.
pub fn dual_objective(w: &[f64], b: f64, alpha_sum: f64) -> f64 {
    0.5 * (w.iter().map(|v| v * v).sum::<f64>() + b * b) - alpha_sum
}
