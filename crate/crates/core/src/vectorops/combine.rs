use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fourier::{dft, idft};
use super::VectorError;
use crate::embedding::FeatureVector;

/// Turns the two feature vectors of a pair into one vector of the same
/// dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineMethod {
    /// `|aᵢ − bᵢ|`
    AbsSub,
    /// `aᵢ · bᵢ`
    Mult,
    /// `Σⱼ aⱼ b_{j+i}` for lags `i = 0..d−1`, out-of-range terms zero.
    CrossCorr,
    /// `Re IDFT(G / ‖G‖₂)` with `G = DFT(a) ∘ DFT(b)`.
    PhaseCorr,
}

impl CombineMethod {
    pub const ALL: [CombineMethod; 4] = [
        CombineMethod::AbsSub,
        CombineMethod::Mult,
        CombineMethod::CrossCorr,
        CombineMethod::PhaseCorr,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CombineMethod::AbsSub => "abssub",
            CombineMethod::Mult => "mult",
            CombineMethod::CrossCorr => "crosscorr",
            CombineMethod::PhaseCorr => "phasecorr",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CombineMethod::AbsSub => "Sub",
            CombineMethod::Mult => "Mult",
            CombineMethod::CrossCorr => "Cross",
            CombineMethod::PhaseCorr => "Phase",
        }
    }
}

impl fmt::Display for CombineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CombineMethod {
    type Err = VectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "abssub" | "sub" => CombineMethod::AbsSub,
            "mult" => CombineMethod::Mult,
            "crosscorr" | "cross" => CombineMethod::CrossCorr,
            "phasecorr" | "phase" => CombineMethod::PhaseCorr,
            _ => {
                return Err(VectorError::UnknownTag {
                    kind: "combination",
                    tag: s.to_string(),
                    valid: "abssub, mult, crosscorr, phasecorr",
                })
            }
        })
    }
}

/// Above this dimension cross-correlation goes through the FFT.
const DIRECT_CROSS_CORR_MAX: usize = 256;

/// Double-loop cross-correlation over non-negative lags.
pub fn cross_correlation_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = a.len();
    (0..d)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..d - i {
                s += a[j] * b[j + i];
            }
            s
        })
        .collect()
}

/// Cross-correlation over non-negative lags; direct for short vectors,
/// zero-padded FFT otherwise.
pub fn cross_correlation(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = a.len();
    if d <= DIRECT_CROSS_CORR_MAX {
        return cross_correlation_direct(a, b);
    }
    let len = 2 * d;
    let pad = |v: &[f64]| {
        let mut p = v.to_vec();
        p.resize(len, 0.0);
        p
    };
    let fa = dft(&pad(a));
    let fb = dft(&pad(b));
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    idft(&prod)[..d].iter().map(|z| z.re).collect()
}

/// Phase correlation. With `classical == false` the product of the two
/// spectra is normalized by its global L2 norm; with `classical == true`
/// the spectrum of `b` is conjugated and every bin is normalized by its own
/// magnitude (zero-magnitude bins stay zero).
pub fn phase_correlation(a: &[f64], b: &[f64], classical: bool) -> Result<Vec<f64>, VectorError> {
    let fa = dft(a);
    let fb = dft(b);
    let g: Vec<Complex64> = if classical {
        fa.iter()
            .zip(&fb)
            .map(|(x, y)| {
                let p = x * y.conj();
                let m = p.norm();
                if m > 0.0 {
                    p / m
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    } else {
        let g: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
        let norm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(VectorError::DegenerateSpectrum);
        }
        g.into_iter().map(|z| z / norm).collect()
    };
    if classical && g.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(VectorError::DegenerateSpectrum);
    }
    Ok(idft(&g).into_iter().map(|z| z.re).collect())
}

pub fn combine_values(a: &[f64], b: &[f64], m: CombineMethod, classical_phase: bool) -> Result<Vec<f64>, VectorError> {
    if a.len() != b.len() {
        return Err(VectorError::DimMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(match m {
        CombineMethod::AbsSub => a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect(),
        CombineMethod::Mult => a.iter().zip(b).map(|(x, y)| x * y).collect(),
        CombineMethod::CrossCorr => cross_correlation(a, b),
        CombineMethod::PhaseCorr => phase_correlation(a, b, classical_phase)?,
    })
}

/// Combines the ID-document vector `a` with the selfie vector `b`; the
/// result carries the provenance of `a`.
pub fn combine(a: &FeatureVector, b: &FeatureVector, m: CombineMethod) -> Result<FeatureVector, VectorError> {
    let values = combine_values(a.values(), b.values(), m, false)?;
    Ok(a.with_values(values).expect("combined values are finite"))
}
