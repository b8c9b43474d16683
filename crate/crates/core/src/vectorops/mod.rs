//! Feature normalization and pair combination.

mod combine;
mod fourier;
mod normalize;

pub use combine::{combine, combine_values, cross_correlation, cross_correlation_direct, phase_correlation, CombineMethod};
pub use fourier::{dft, dft_direct, idft, idft_direct};
pub use normalize::{normalize, normalize_values, NormMethod};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorError {
    #[error("cannot {method}-normalize: the vector has zero norm or zero spread")]
    DegenerateVector { method: &'static str },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("phase correlation spectrum has zero norm")]
    DegenerateSpectrum,
    #[error("unknown {kind} {tag:?}; valid: {valid}")]
    UnknownTag {
        kind: &'static str,
        tag: String,
        valid: &'static str,
    },
}
