use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::VectorError;
use crate::embedding::FeatureVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NormMethod {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "l2")]
    L2,
    /// Zero mean, unit population standard deviation.
    #[serde(rename = "z")]
    Z,
}

impl NormMethod {
    pub const ALL: [NormMethod; 4] = [NormMethod::None, NormMethod::L1, NormMethod::L2, NormMethod::Z];

    pub fn tag(self) -> &'static str {
        match self {
            NormMethod::None => "none",
            NormMethod::L1 => "l1",
            NormMethod::L2 => "l2",
            NormMethod::Z => "z",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NormMethod::None => "None",
            NormMethod::L1 => "L1",
            NormMethod::L2 => "L2",
            NormMethod::Z => "Z-Norm",
        }
    }
}

impl fmt::Display for NormMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NormMethod {
    type Err = VectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "none" => NormMethod::None,
            "l1" => NormMethod::L1,
            "l2" => NormMethod::L2,
            "z" | "zscore" | "z-norm" => NormMethod::Z,
            _ => {
                return Err(VectorError::UnknownTag {
                    kind: "normalization",
                    tag: s.to_string(),
                    valid: "none, l1, l2, z",
                })
            }
        })
    }
}

pub fn normalize_values(x: &[f64], m: NormMethod) -> Result<Vec<f64>, VectorError> {
    let degenerate = || VectorError::DegenerateVector { method: m.tag() };
    match m {
        NormMethod::None => Ok(x.to_vec()),
        NormMethod::L1 => {
            let n: f64 = x.iter().map(|v| v.abs()).sum();
            if n > 0.0 {
                Ok(x.iter().map(|v| v / n).collect())
            } else {
                Err(degenerate())
            }
        }
        NormMethod::L2 => {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                Ok(x.iter().map(|v| v / n).collect())
            } else {
                Err(degenerate())
            }
        }
        NormMethod::Z => {
            let len = x.len() as f64;
            let mean = x.iter().sum::<f64>() / len;
            let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len).sqrt();
            if sd > 0.0 {
                Ok(x.iter().map(|v| (v - mean) / sd).collect())
            } else {
                Err(degenerate())
            }
        }
    }
}

/// Normalizes a feature vector; provenance is kept.
pub fn normalize(v: &FeatureVector, m: NormMethod) -> Result<FeatureVector, VectorError> {
    let values = normalize_values(v.values(), m)?;
    Ok(v.with_values(values).expect("normalized values are finite"))
}
