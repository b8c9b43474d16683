use std::sync::OnceLock;

use super::{FeatureMeta, FeatureVector, LayerSelector};
use crate::imaging::{AlignedFace, ALIGNED_SIZE};
use crate::raster::gray_u8;

/// Cells per side of the histogram grid.
pub const LBP_CELLS: usize = 8;
/// 58 uniform patterns plus one bin shared by all non-uniform patterns.
pub const LBP_BINS: usize = 59;
pub const LBP_DIM: usize = LBP_CELLS * LBP_CELLS * LBP_BINS;

/// Neighbor offsets, walking the 8-neighborhood ring clockwise from the
/// top-left; bit `k` of the code is neighbor `k`.
const RING: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

/// 8-neighbor, radius-1 LBP code at `(x, y)`; bit set when neighbor ≥
/// center. Borders replicate the edge pixel.
pub fn lbp_code(gray: &[u8], width: usize, height: usize, x: usize, y: usize) -> u8 {
    let center = gray[y * width + x];
    let mut code = 0u8;
    for (k, (dx, dy)) in RING.iter().enumerate() {
        let nx = (x as isize + dx).clamp(0, width as isize - 1) as usize;
        let ny = (y as isize + dy).clamp(0, height as isize - 1) as usize;
        if gray[ny * width + nx] >= center {
            code |= 1 << k;
        }
    }
    code
}

fn transitions(code: u8) -> u32 {
    (code ^ code.rotate_left(1)).count_ones()
}

/// Histogram bin of an LBP code: uniform codes (≤ 2 circular transitions)
/// get bins 0..58 in increasing code order, everything else bin 58.
pub fn uniform_bin(code: u8) -> usize {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0u8; 256];
        let mut next = 0u8;
        for c in 0..=255u8 {
            t[c as usize] = if transitions(c) <= 2 {
                next += 1;
                next - 1
            } else {
                (LBP_BINS - 1) as u8
            };
        }
        debug_assert_eq!(next as usize, LBP_BINS - 1);
        t
    });
    table[code as usize] as usize
}

/// Uniform LBP histograms over an 8×8 grid of 28×28-pixel cells of the
/// grayscale face, concatenated row-major (3776 raw counts).
pub fn embed_lbp(face: &AlignedFace) -> FeatureVector {
    let n = ALIGNED_SIZE as usize;
    let cell = n / LBP_CELLS;
    let gray = gray_u8(face.pixels());
    let mut hist = vec![0.0; LBP_DIM];
    for y in 0..n {
        for x in 0..n {
            let c = (y / cell) * LBP_CELLS + x / cell;
            hist[c * LBP_BINS + uniform_bin(lbp_code(&gray, n, n, x, y))] += 1.0;
        }
    }
    FeatureVector::new(
        hist,
        FeatureMeta {
            embedder: "lbp".into(),
            layer: LayerSelector::Lbp,
            rectified: false,
            sample: face.source().clone(),
        },
    )
    .expect("histogram counts are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Domain, SampleKey};
    use image::{Rgb, RgbImage};

    fn face(f: impl Fn(u32, u32) -> u8) -> AlignedFace {
        AlignedFace::new(
            RgbImage::from_fn(ALIGNED_SIZE, ALIGNED_SIZE, |x, y| Rgb([f(x, y); 3])),
            SampleKey::new("s", Domain::IdDocument),
        )
    }

    #[test]
    fn fifty_eight_uniform_patterns() {
        let uniform = (0..=255u8).filter(|&c| transitions(c) <= 2).count();
        assert_eq!(uniform, 58);
        assert_eq!(uniform_bin(0), 0);
        assert_eq!(uniform_bin(255), 57);
        assert_eq!(uniform_bin(0b0101_0101), 58);
    }

    #[test]
    fn constant_image_concentrates_in_flat_bin() {
        let v = embed_lbp(&face(|_, _| 120));
        assert_eq!(v.dim(), LBP_DIM);
        let flat = uniform_bin(0xFF);
        assert_eq!(transitions(0xFF), 0);
        for cell in v.values().chunks(LBP_BINS) {
            assert_eq!(cell[flat], 784.0);
            assert_eq!(cell.iter().sum::<f64>(), 784.0);
        }
    }

    #[test]
    fn vertical_edge_matches_brute_force() {
        let edge = 4 * 28;
        let img = face(|x, _| if (x as usize) < edge { 0 } else { 255 });
        let v = embed_lbp(&img);
        let cells: Vec<&[f64]> = v.values().chunks(LBP_BINS).collect();

        // brute-force oracle: direct neighbor comparisons for the two cell
        // columns that meet at the edge
        let gray = |x: isize, y: isize| -> u8 {
            let x = x.clamp(0, 223);
            let _ = y;
            if (x as usize) < edge {
                0
            } else {
                255
            }
        };
        for col in [3usize, 4] {
            let mut expected = vec![0.0; LBP_BINS];
            for y in 0..28isize {
                for x in (col * 28) as isize..((col + 1) * 28) as isize {
                    let c = gray(x, y);
                    let mut code = 0u8;
                    for (k, (dx, dy)) in RING.iter().enumerate() {
                        if gray(x + dx, y + dy) >= c {
                            code |= 1 << k;
                        }
                    }
                    expected[uniform_bin(code)] += 1.0;
                }
            }
            for row in 0..LBP_CELLS {
                assert_eq!(cells[row * LBP_CELLS + col], expected.as_slice(), "cell ({row}, {col})");
            }
        }
        // left of the edge everything is flat; right of it one pixel column
        // sees the dark side
        assert_eq!(cells[3][uniform_bin(0xFF)], 784.0);
        assert_eq!(cells[4][uniform_bin(0xFF)], 756.0);
        assert_eq!(cells[4][uniform_bin(0b0011_1110)], 28.0);
    }
}
