use serde::{Deserialize, Serialize};

use super::dist::{chi2_sf, normal_cdf};
use super::EvalError;

fn check_groups(groups: &[Vec<f64>]) -> Result<(), EvalError> {
    if groups.len() < 2 {
        return Err(EvalError::TooFewGroups(groups.len()));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(EvalError::EmptyGroup(i));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFiniteGroup(i));
        }
    }
    Ok(())
}

/// Midranks (1-based, ties share their average rank) of the pooled groups,
/// returned per group, plus `Σ(t³ − t)` over tie blocks.
pub fn midranks(groups: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let mut pooled: Vec<(f64, usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, vals)| vals.iter().enumerate().map(move |(i, &v)| (v, g, i)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks: Vec<Vec<f64>> = groups.iter().map(|g| vec![0.0; g.len()]).collect();
    let mut ties = 0.0;
    let mut start = 0;
    while start < pooled.len() {
        let mut end = start + 1;
        while end < pooled.len() && pooled[end].0 == pooled[start].0 {
            end += 1;
        }
        let t = (end - start) as f64;
        ties += t * t * t - t;
        let rank = (start + 1 + end) as f64 / 2.0;
        for &(_, g, i) in &pooled[start..end] {
            ranks[g][i] = rank;
        }
        start = end;
    }
    (ranks, ties)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KruskalWallis {
    /// Tie-corrected H statistic.
    pub h: f64,
    pub p: f64,
    pub df: usize,
}

/// Kruskal-Wallis H test with midranks and the tie correction
/// `H / (1 − Σ(t³ − t)/(N³ − N))`; `p` is the chi-square survival at
/// `k − 1` degrees of freedom. All values identical gives `(0, 1)`.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KruskalWallis, EvalError> {
    check_groups(groups)?;
    let df = groups.len() - 1;
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let (ranks, ties) = midranks(groups);
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalWallis { h: 0.0, p: 1.0, df });
    }
    let sum: f64 = ranks
        .iter()
        .map(|r| r.iter().sum::<f64>().powi(2) / r.len() as f64)
        .sum();
    let h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)).max(0.0) / correction;
    Ok(KruskalWallis {
        h,
        p: chi2_sf(h, df as f64),
        df,
    })
}

/// Symmetric matrix of Bonferroni-adjusted Dunn p-values; the diagonal is
/// empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DunnMatrix {
    pub p: Vec<Vec<Option<f64>>>,
}

impl DunnMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.p[i][j]
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Dunn's pairwise test on mean midranks with the tie-corrected variance,
/// two-sided, multiplied by the number of comparisons `k(k−1)/2` and
/// capped at 1.
pub fn dunn_posthoc(groups: &[Vec<f64>]) -> Result<DunnMatrix, EvalError> {
    check_groups(groups)?;
    let k = groups.len();
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let (ranks, ties) = midranks(groups);
    let mean_rank: Vec<f64> = ranks.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect();
    let spread = n * (n + 1.0) / 12.0 - ties / (12.0 * (n - 1.0));
    let comparisons = (k * (k - 1) / 2) as f64;
    let mut p = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..i {
            let diff = mean_rank[i] - mean_rank[j];
            let se = (spread * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
            let raw = if diff == 0.0 || !(se > 0.0) {
                1.0
            } else {
                2.0 * (1.0 - normal_cdf((diff / se).abs()))
            };
            let adjusted = (raw * comparisons).min(1.0);
            p[i][j] = Some(adjusted);
            p[j][i] = Some(adjusted);
        }
    }
    Ok(DunnMatrix { p })
}

/// Omnibus test plus, when `kw.p ≤ alpha`, the post hoc matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatTestReport {
    pub h_statistic: f64,
    pub kw_pvalue: f64,
    pub pairwise: Option<DunnMatrix>,
}

pub fn stat_test(groups: &[Vec<f64>], alpha: f64) -> Result<StatTestReport, EvalError> {
    let kw = kruskal_wallis(groups)?;
    let pairwise = if kw.p <= alpha { Some(dunn_posthoc(groups)?) } else { None };
    Ok(StatTestReport {
        h_statistic: kw.h,
        kw_pvalue: kw.p,
        pairwise,
    })
}
