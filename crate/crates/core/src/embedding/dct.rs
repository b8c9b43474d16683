use std::sync::OnceLock;

use super::{FeatureMeta, FeatureVector, LayerSelector};
use crate::imaging::{AlignedFace, ALIGNED_SIZE};
use crate::raster::gray_u8;

pub const DCT_BLOCK: usize = 8;
/// Zigzag coefficients kept per block.
pub const DCT_COEFFS: usize = 10;
pub const DCT_DIM: usize = (ALIGNED_SIZE as usize / DCT_BLOCK).pow(2) * DCT_COEFFS;

/// The first ten JPEG zigzag positions as `(row, col)`, i.e. (vertical,
/// horizontal) frequency.
pub const ZIGZAG: [(usize, usize); DCT_COEFFS] =
    [(0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2), (0, 3), (1, 2), (2, 1), (3, 0)];

/// Orthonormal DCT-II basis, `basis[k][n] = α(k) cos((2n + 1)kπ / 16)`.
fn basis() -> &'static [[f64; DCT_BLOCK]; DCT_BLOCK] {
    static B: OnceLock<[[f64; DCT_BLOCK]; DCT_BLOCK]> = OnceLock::new();
    B.get_or_init(|| {
        let n = DCT_BLOCK as f64;
        let mut b = [[0.0; DCT_BLOCK]; DCT_BLOCK];
        for (k, row) in b.iter_mut().enumerate() {
            let alpha = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            for (i, v) in row.iter_mut().enumerate() {
                *v = alpha * ((2 * i + 1) as f64 * k as f64 * std::f64::consts::PI / (2.0 * n)).cos();
            }
        }
        b
    })
}

/// Separable orthonormal 2-D DCT-II of a row-major 8×8 block. Output is
/// row-major in (vertical, horizontal) frequency.
pub fn dct_block(block: &[f64; 64]) -> [f64; 64] {
    let b = basis();
    // rows: tmp[y][u] = Σ_x block[y][x] b[u][x]
    let mut tmp = [0.0; 64];
    for y in 0..DCT_BLOCK {
        for u in 0..DCT_BLOCK {
            tmp[y * 8 + u] = (0..DCT_BLOCK).map(|x| block[y * 8 + x] * b[u][x]).sum();
        }
    }
    let mut out = [0.0; 64];
    for v in 0..DCT_BLOCK {
        for u in 0..DCT_BLOCK {
            out[v * 8 + u] = (0..DCT_BLOCK).map(|y| tmp[y * 8 + u] * b[v][y]).sum();
        }
    }
    out
}

/// Blockwise DCT descriptor: the grayscale face is cut into 28×28
/// non-overlapping 8×8 blocks and the first ten zigzag coefficients of each
/// are concatenated (7840 values).
pub fn embed_dct(face: &AlignedFace) -> FeatureVector {
    let n = ALIGNED_SIZE as usize;
    let blocks = n / DCT_BLOCK;
    let gray = gray_u8(face.pixels());
    let mut values = Vec::with_capacity(DCT_DIM);
    for by in 0..blocks {
        for bx in 0..blocks {
            let mut block = [0.0; 64];
            for y in 0..DCT_BLOCK {
                for x in 0..DCT_BLOCK {
                    block[y * 8 + x] = gray[(by * 8 + y) * n + bx * 8 + x] as f64;
                }
            }
            let coeffs = dct_block(&block);
            values.extend(ZIGZAG.iter().map(|&(r, c)| coeffs[r * 8 + c]));
        }
    }
    FeatureVector::new(
        values,
        FeatureMeta {
            embedder: "dct".into(),
            layer: LayerSelector::Dct,
            rectified: false,
            sample: face.source().clone(),
        },
    )
    .expect("DCT coefficients are finite")
}
