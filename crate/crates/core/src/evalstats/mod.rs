//! Verification error rates, DET curve data and nonparametric tests.

mod det;
mod dist;
mod nonparam;
mod rates;

pub use det::{det_points, write_det_csv, DetPoint, DET_CSV_HEADER};
pub use dist::{chi2_sf, normal_cdf, probit};
pub use nonparam::{dunn_posthoc, kruskal_wallis, midranks, stat_test, DunnMatrix, KruskalWallis, StatTestReport};
pub use rates::{
    candidate_thresholds, counts_at, eer_threshold, hter, rates_at, ConfusionCounts, PairScoreSet, ThresholdReport,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("score set has no genuine pairs")]
    NoGenuine,
    #[error("score set has no impostor pairs")]
    NoImpostor,
    #[error("score set contains a non-finite score")]
    NonFinite,
    #[error("need at least two groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("group {0} contains a non-finite value")]
    NonFiniteGroup(usize),
    #[error("no values to summarize")]
    NoValues,
}

/// Descriptive statistics of a sample (standard deviation with the n − 1
/// denominator, 0 for a single value).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub median: f64,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

/// Median of a non-empty slice (mean of the two central values for even n).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

pub fn summarize(values: &[f64]) -> Result<Summary, EvalError> {
    let median = median(values).ok_or(EvalError::NoValues)?;
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let stddev = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        n,
        median,
        mean,
        stddev,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Serializes ±∞ thresholds as the strings `"inf"` / `"-inf"` (JSON has no
/// infinities); finite values stay numbers.
pub mod serde_threshold {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(serde::de::Error::custom(format!("invalid threshold {t:?}"))),
            },
        }
    }
}
