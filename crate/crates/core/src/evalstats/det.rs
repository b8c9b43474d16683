use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dist::probit;
use super::rates::{candidate_thresholds, counts_at, PairScoreSet};

pub const DET_CSV_HEADER: &str = "tau,far,frr,probit_far,probit_frr";

/// One DET curve vertex with its normal-deviate coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetPoint {
    #[serde(with = "super::serde_threshold")]
    pub tau: f64,
    pub far: f64,
    pub frr: f64,
    pub probit_far: f64,
    pub probit_frr: f64,
}

fn clamped_probit(rate: f64, n: usize) -> f64 {
    let eps = 1.0 / (2.0 * n as f64);
    probit(rate.clamp(eps, 1.0 - eps))
}

/// The DET staircase: one point per candidate threshold, ascending in tau
/// (FAR non-increasing, FRR non-decreasing). Before the probit transform
/// FAR is clamped to `[1/(2n_i), 1 − 1/(2n_i)]` and FRR to the same with
/// the genuine count.
pub fn det_points(scores: &PairScoreSet) -> Vec<DetPoint> {
    let (ng, ni) = (scores.genuine().len(), scores.impostor().len());
    candidate_thresholds(scores)
        .into_iter()
        .map(|tau| {
            let c = counts_at(scores, tau);
            let (far, frr) = (c.far(), c.frr());
            DetPoint {
                tau,
                far,
                frr,
                probit_far: clamped_probit(far, ni),
                probit_frr: clamped_probit(frr, ng),
            }
        })
        .collect()
}

/// Writes DET points as CSV with [`DET_CSV_HEADER`]; infinite thresholds
/// are written as `inf` / `-inf`.
pub fn write_det_csv(out: &mut impl Write, points: &[DetPoint]) -> std::io::Result<()> {
    writeln!(out, "{DET_CSV_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{},{},{}", p.tau, p.far, p.frr, p.probit_far, p.probit_frr)?;
    }
    Ok(())
}
