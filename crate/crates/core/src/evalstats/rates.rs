use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dataset::Label;

/// Scores of labeled verification pairs; higher means more likely genuine.
///
/// Genuine and impostor scores are kept sorted so that the counts at any
/// threshold are two binary searches.
#[derive(Clone, Debug, PartialEq)]
pub struct PairScoreSet {
    genuine: Vec<f64>,
    impostor: Vec<f64>,
}

impl PairScoreSet {
    pub fn new(scores: impl IntoIterator<Item = (f64, Label)>) -> Result<Self, EvalError> {
        let mut genuine = Vec::new();
        let mut impostor = Vec::new();
        for (s, l) in scores {
            if !s.is_finite() {
                return Err(EvalError::NonFinite);
            }
            match l {
                Label::Genuine => genuine.push(s),
                Label::Impostor => impostor.push(s),
            }
        }
        if genuine.is_empty() {
            return Err(EvalError::NoGenuine);
        }
        if impostor.is_empty() {
            return Err(EvalError::NoImpostor);
        }
        genuine.sort_by(f64::total_cmp);
        impostor.sort_by(f64::total_cmp);
        Ok(PairScoreSet { genuine, impostor })
    }

    pub fn from_parts(genuine: &[f64], impostor: &[f64]) -> Result<Self, EvalError> {
        Self::new(
            genuine
                .iter()
                .map(|&s| (s, Label::Genuine))
                .chain(impostor.iter().map(|&s| (s, Label::Impostor))),
        )
    }

    pub fn genuine(&self) -> &[f64] {
        &self.genuine
    }

    pub fn impostor(&self) -> &[f64] {
        &self.impostor
    }

    pub fn len(&self) -> usize {
        self.genuine.len() + self.impostor.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Applies `f` to every score (e.g. to check invariance under monotone
    /// transforms).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, EvalError> {
        Self::from_parts(
            &self.genuine.iter().map(|&s| f(s)).collect::<Vec<_>>(),
            &self.impostor.iter().map(|&s| f(s)).collect::<Vec<_>>(),
        )
    }
}

/// Outcome counts at one threshold, genuine being the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn far(&self) -> f64 {
        self.fp as f64 / (self.fp + self.tn) as f64
    }

    pub fn frr(&self) -> f64 {
        self.fn_ as f64 / (self.fn_ + self.tp) as f64
    }
}

/// Counts with the accept rule `score ≥ tau`.
pub fn counts_at(scores: &PairScoreSet, tau: f64) -> ConfusionCounts {
    let rejected_genuine = scores.genuine.partition_point(|&s| s < tau);
    let rejected_impostor = scores.impostor.partition_point(|&s| s < tau);
    ConfusionCounts {
        tp: scores.genuine.len() - rejected_genuine,
        fn_: rejected_genuine,
        fp: scores.impostor.len() - rejected_impostor,
        tn: rejected_impostor,
    }
}

/// Error rates at one threshold. `hter` is always `(far + frr) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    #[serde(with = "super::serde_threshold")]
    pub tau: f64,
    pub far: f64,
    pub frr: f64,
    pub hter: f64,
}

impl ThresholdReport {
    fn from_counts(tau: f64, c: ConfusionCounts) -> Self {
        let (far, frr) = (c.far(), c.frr());
        ThresholdReport {
            tau,
            far,
            frr,
            hter: hter(far, frr),
        }
    }
}

pub fn hter(far: f64, frr: f64) -> f64 {
    (far + frr) / 2.0
}

pub fn rates_at(scores: &PairScoreSet, tau: f64) -> ThresholdReport {
    ThresholdReport::from_counts(tau, counts_at(scores, tau))
}

/// Every threshold that yields a distinct operating point: `−∞`, the
/// midpoints between consecutive distinct scores, and `+∞`, ascending.
pub fn candidate_thresholds(scores: &PairScoreSet) -> Vec<f64> {
    let mut all: Vec<f64> = scores.genuine.iter().chain(&scores.impostor).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let mut out = Vec::with_capacity(all.len() + 1);
    out.push(f64::NEG_INFINITY);
    for w in all.windows(2) {
        let mid = w[0] + (w[1] - w[0]) / 2.0;
        // adjacent floats: the midpoint may round onto the lower score
        out.push(if mid > w[0] { mid } else { w[1] });
    }
    out.push(f64::INFINITY);
    out
}

/// Equal-error operating point.
///
/// Among [`candidate_thresholds`], picks the one minimizing `|FAR − FRR|`,
/// then `FAR + FRR`, then `tau`. Comparisons are done on exact integer
/// cross-products, so ties are recognized exactly. The reported `hter` is
/// the EER, `(FAR + FRR) / 2` at that threshold.
pub fn eer_threshold(scores: &PairScoreSet) -> ThresholdReport {
    let ng = scores.genuine.len() as i128;
    let ni = scores.impostor.len() as i128;
    let mut best: Option<((i128, i128), f64, ConfusionCounts)> = None;
    for tau in candidate_thresholds(scores) {
        let c = counts_at(scores, tau);
        // FAR − FRR and FAR + FRR scaled by ng · ni
        let a = c.fp as i128 * ng;
        let b = c.fn_ as i128 * ni;
        let key = ((a - b).abs(), a + b);
        // candidates ascend, so a strict improvement keeps the smallest tau
        if best.as_ref().map_or(true, |(k, _, _)| key < *k) {
            best = Some((key, tau, c));
        }
    }
    let (_, tau, c) = best.expect("at least two candidates");
    ThresholdReport::from_counts(tau, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(g: &[f64], i: &[f64]) -> PairScoreSet {
        PairScoreSet::from_parts(g, i).unwrap()
    }

    #[test]
    fn perfect_separation() {
        let s = set(&[0.9, 0.8], &[0.1, 0.2]);
        let r = rates_at(&s, 0.5);
        assert_eq!((r.far, r.frr, r.hter), (0.0, 0.0, 0.0));
        assert_eq!(eer_threshold(&s).hter, 0.0);
    }

    #[test]
    fn reported_operating_point() {
        let h = hter(0.02222, 0.10000);
        assert!((h - 0.06111).abs() < 1e-12);
    }

    #[test]
    fn minus_infinity_accepts_everything() {
        let r = rates_at(&set(&[0.3], &[0.1, 0.7]), f64::NEG_INFINITY);
        assert_eq!((r.far, r.frr, r.hter), (1.0, 0.0, 0.5));
    }

    #[test]
    fn inverted_and_tied_sets() {
        // fully inverted: between the two scores both rates are 1, which is
        // the only point with FAR = FRR
        let r = eer_threshold(&set(&[0.4], &[0.6]));
        assert_eq!((r.tau, r.far, r.frr, r.hter), (0.5, 1.0, 1.0, 1.0));
        let r = eer_threshold(&set(&[0.5, 0.5], &[0.5, 0.5, 0.5]));
        assert_eq!(r.hter, 0.5);
        assert_eq!(r.tau, f64::NEG_INFINITY);
    }

    #[test]
    fn missing_class_is_an_error() {
        assert_eq!(PairScoreSet::from_parts(&[], &[1.0]), Err(EvalError::NoGenuine));
        assert_eq!(PairScoreSet::from_parts(&[1.0], &[]), Err(EvalError::NoImpostor));
        assert_eq!(PairScoreSet::from_parts(&[f64::NAN], &[1.0]), Err(EvalError::NonFinite));
    }

    #[test]
    fn infinite_threshold_json() {
        let r = rates_at(&set(&[1.0], &[0.0]), f64::INFINITY);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"tau\":\"inf\""));
        let back: ThresholdReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
