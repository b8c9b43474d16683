//! Feature extraction.
//!
//! Three sources produce [`FeatureVector`]s:
//!
//! * built-in handcrafted descriptors, [`embed_lbp`] and [`embed_dct`];
//! * a deterministic [`SurrogateNetwork`] stacked on a built-in descriptor,
//!   which yields pre-activation `fc6n`/`fc7n`/`fc8` vectors with the
//!   dimensions of the real network so that the whole layer study runs
//!   without network weights;
//! * externally exported activations read from `EMB1` files with
//!   [`load_external`].
//!
//! Files and the surrogate always carry pre-activation values; the rectified
//! `fc6`/`fc7` variants are produced with [`rectify`].

mod dct;
mod emb1;
mod lbp;
mod surrogate;

pub use dct::{dct_block, embed_dct, DCT_BLOCK, DCT_COEFFS, DCT_DIM, ZIGZAG};
pub use emb1::{load_external, read_emb1, write_emb1, Emb1File, EMB1_MAGIC, EMB1_VERSION};
pub use lbp::{embed_lbp, lbp_code, uniform_bin, LBP_BINS, LBP_CELLS, LBP_DIM};
pub use surrogate::{SurrogateActivations, SurrogateNetwork, SURROGATE_FAN_IN};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SampleKey;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic {found:?}, expected \"EMB1\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported EMB1 version {0}")]
    VersionMismatch(u16),
    #[error("truncated header at byte {offset}")]
    TruncatedHeader { offset: usize },
    #[error("truncated record {index} at byte offset {offset}")]
    TruncatedRecord { index: usize, offset: usize },
    #[error("{extra} trailing bytes after the last record")]
    TrailingBytes { extra: usize },
    #[error("record {index}: invalid domain byte {value}")]
    BadDomain { index: usize, value: u8 },
    #[error("record {index}: id is not valid UTF-8")]
    BadId { index: usize },
    #[error("duplicate record for {0}")]
    DuplicateRecord(SampleKey),
    #[error("{0}: non-finite feature value")]
    NonFinite(String),
    #[error("empty feature vector")]
    Empty,
    #[error("requested layer {requested} but the file declares {found}")]
    LayerMismatch { requested: String, found: String },
    #[error("layer {layer} has dimension {expected}, file declares {found}")]
    DimMismatch { layer: LayerSelector, expected: usize, found: usize },
    #[error("unknown layer {0:?}; valid: fc6n, fc6, fc7n, fc7, fc8, lbp, dct")]
    UnknownLayer(String),
    #[error("layer tag {0:?} is not a valid EMB1 tag")]
    BadTag(String),
}

/// Which representation a feature vector comes from.
///
/// `fc6`/`fc7` are the rectified versions of the stored pre-activation
/// `fc6n`/`fc7n`; `fc8` is the pre-softmax output and has no rectified
/// variant. `lbp` and `dct` are the built-in handcrafted descriptors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerSelector {
    Fc6n,
    Fc6,
    Fc7n,
    Fc7,
    Fc8,
    Lbp,
    Dct,
}

impl LayerSelector {
    /// The layer menu of the network study, in report order.
    pub const NETWORK: [LayerSelector; 5] = [
        LayerSelector::Fc6n,
        LayerSelector::Fc6,
        LayerSelector::Fc7n,
        LayerSelector::Fc7,
        LayerSelector::Fc8,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            LayerSelector::Fc6n => "fc6n",
            LayerSelector::Fc6 => "fc6",
            LayerSelector::Fc7n => "fc7n",
            LayerSelector::Fc7 => "fc7",
            LayerSelector::Fc8 => "fc8",
            LayerSelector::Lbp => "lbp",
            LayerSelector::Dct => "dct",
        }
    }

    /// The stored (pre-activation) layer this selector reads.
    pub fn stored(self) -> LayerSelector {
        match self {
            LayerSelector::Fc6 => LayerSelector::Fc6n,
            LayerSelector::Fc7 => LayerSelector::Fc7n,
            other => other,
        }
    }

    pub fn rectified(self) -> bool {
        matches!(self, LayerSelector::Fc6 | LayerSelector::Fc7)
    }

    pub fn is_network_layer(self) -> bool {
        !matches!(self, LayerSelector::Lbp | LayerSelector::Dct)
    }

    pub fn expected_dim(self) -> usize {
        match self {
            LayerSelector::Fc6n | LayerSelector::Fc6 | LayerSelector::Fc7n | LayerSelector::Fc7 => 4096,
            LayerSelector::Fc8 => 2622,
            LayerSelector::Lbp => LBP_DIM,
            LayerSelector::Dct => DCT_DIM,
        }
    }
}

impl fmt::Display for LayerSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for LayerSelector {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "fc6n" => LayerSelector::Fc6n,
            "fc6" => LayerSelector::Fc6,
            "fc7n" => LayerSelector::Fc7n,
            "fc7" => LayerSelector::Fc7,
            "fc8" => LayerSelector::Fc8,
            "lbp" => LayerSelector::Lbp,
            "dct" => LayerSelector::Dct,
            _ => return Err(EmbeddingError::UnknownLayer(s.to_string())),
        })
    }
}

/// Provenance of a feature vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    /// Embedder that produced the values, e.g. `lbp`, `surrogate/lbp`, `emb1`.
    pub embedder: String,
    pub layer: LayerSelector,
    pub rectified: bool,
    pub sample: SampleKey,
}

/// A dense, finite, non-empty real feature vector with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    meta: FeatureMeta,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, meta: FeatureMeta) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite(meta.sample.to_string()));
        }
        Ok(FeatureVector { values, meta })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn meta(&self) -> &FeatureMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Same provenance, new values (which must stay finite).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, EmbeddingError> {
        FeatureVector::new(values, self.meta.clone())
    }
}

/// Element-wise `max(0, x)`; marks the vector rectified and maps
/// `fc6n → fc6`, `fc7n → fc7`.
pub fn rectify(v: &FeatureVector) -> FeatureVector {
    let values = v.values.iter().map(|&x| x.max(0.0)).collect();
    let layer = match v.meta.layer {
        LayerSelector::Fc6n => LayerSelector::Fc6,
        LayerSelector::Fc7n => LayerSelector::Fc7,
        other => other,
    };
    FeatureVector {
        values,
        meta: FeatureMeta {
            layer,
            rectified: true,
            ..v.meta.clone()
        },
    }
}

/// Fraction of entries that are exactly zero.
pub fn sparsity(v: &FeatureVector) -> f64 {
    v.values.iter().filter(|&&x| x == 0.0).count() as f64 / v.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Domain;
    use rand::{Rng, SeedableRng};

    fn fv(values: Vec<f64>) -> FeatureVector {
        FeatureVector::new(
            values,
            FeatureMeta {
                embedder: "test".into(),
                layer: LayerSelector::Fc7n,
                rectified: false,
                sample: SampleKey::new("a", Domain::Selfie),
            },
        )
        .unwrap()
    }

    #[test]
    fn rectify_definition() {
        let r = rectify(&fv(vec![-1.0, 0.0, 2.0]));
        assert_eq!(r.values(), &[0.0, 0.0, 2.0]);
        assert!(r.meta().rectified);
        assert_eq!(r.meta().layer, LayerSelector::Fc7);
        let pos = fv(vec![0.5, 3.0]);
        assert_eq!(rectify(&pos).values(), pos.values());
        assert_eq!(rectify(&rectify(&r)).values(), r.values());
    }

    #[test]
    fn sparsity_examples() {
        assert_eq!(sparsity(&fv(vec![0.0, 0.0, 1.0, 2.0])), 0.5);
        assert_eq!(sparsity(&fv(vec![0.0; 7])), 1.0);
    }

    #[test]
    fn rectified_symmetric_noise_is_half_sparse() {
        // Monte Carlo: the fraction of negative draws of a symmetric
        // distribution concentrates at 1/2 with σ = 0.5/√4096 ≈ 0.0078.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = fv((0..4096).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let s = sparsity(&rectify(&v));
            assert!((s - 0.5).abs() <= 0.05, "sparsity {s}");
        }
    }

    #[test]
    fn vectors_must_be_finite_and_non_empty() {
        let meta = fv(vec![1.0]).meta().clone();
        assert!(matches!(FeatureVector::new(vec![], meta.clone()), Err(EmbeddingError::Empty)));
        assert!(matches!(
            FeatureVector::new(vec![1.0, f64::NAN], meta),
            Err(EmbeddingError::NonFinite(_))
        ));
    }

    #[test]
    fn layer_tags() {
        for l in LayerSelector::NETWORK.into_iter().chain([LayerSelector::Lbp, LayerSelector::Dct]) {
            assert_eq!(l.tag().parse::<LayerSelector>().unwrap(), l);
        }
        assert_eq!(LayerSelector::Fc6.stored(), LayerSelector::Fc6n);
        assert_eq!(LayerSelector::Fc8.expected_dim(), 2622);
        assert!("fc9".parse::<LayerSelector>().is_err());
    }
}
