use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::ImagingError;
use crate::raster::{merge_rgb, split_rgb, Plane};

/// Automatic Color Equalization parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AceParams {
    /// Slope of the contrast function `r(d) = clamp(slope·d, -sat, sat)`.
    pub slope: f64,
    pub saturation: f64,
    /// Neighbors are taken every `neighbor_stride` pixels in x and y.
    pub neighbor_stride: usize,
}

impl Default for AceParams {
    fn default() -> Self {
        AceParams {
            slope: 5.0,
            saturation: 1.0,
            neighbor_stride: 2,
        }
    }
}

impl AceParams {
    pub fn validate(&self) -> Result<(), ImagingError> {
        let bad = |message: String| Err(ImagingError::InvalidParameter { method: "ace", message });
        if !(self.slope > 0.0 && self.slope.is_finite()) {
            return bad(format!("slope must be positive, got {}", self.slope));
        }
        if !(self.saturation > 0.0 && self.saturation.is_finite()) {
            return bad(format!("saturation must be positive, got {}", self.saturation));
        }
        if self.neighbor_stride == 0 {
            return bad("neighbor_stride must be at least 1".into());
        }
        Ok(())
    }
}

/// Chromatic/spatial adjustment: for every pixel p and channel,
/// `R(p) = Σ_q r(I(p) - I(q)) / |p - q|`, normalized by `Σ_q 1/|p - q|`
/// over the subsampled neighbor grid (q ≠ p), intensities scaled to [0, 1].
fn adjust(planes: &[Plane; 3], p: &AceParams) -> [Vec<f64>; 3] {
    let (w, h) = (planes[0].width(), planes[0].height());
    let stride = p.neighbor_stride;
    let gxs: Vec<usize> = (0..w).step_by(stride).collect();
    let gys: Vec<usize> = (0..h).step_by(stride).collect();
    let gw = gxs.len();

    // neighbor intensities, grid-row-major, three channels interleaved
    let mut grid = Vec::with_capacity(gw * gys.len() * 3);
    for &y in &gys {
        for &x in &gxs {
            for plane in planes {
                grid.push(plane.get(x, y) / 255.0);
            }
        }
    }
    // inverse distance table indexed by |dy| * w + |dx|; zero at the origin
    // so that q = p drops out of both sums
    let mut inv_dist = vec![0.0f64; w * h];
    for dy in 0..h {
        for dx in 0..w {
            if dx + dy > 0 {
                inv_dist[dy * w + dx] = 1.0 / ((dx * dx + dy * dy) as f64).sqrt();
            }
        }
    }

    let (slope, sat) = (p.slope, p.saturation);
    let mut out = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
    let mut dx_index = vec![0usize; gw];
    for y in 0..h {
        for x in 0..w {
            for (k, &gx) in gxs.iter().enumerate() {
                dx_index[k] = x.abs_diff(gx);
            }
            let c = [
                planes[0].get(x, y) / 255.0,
                planes[1].get(x, y) / 255.0,
                planes[2].get(x, y) / 255.0,
            ];
            let mut acc = [0.0f64; 3];
            let mut norm = 0.0f64;
            for (gy_i, &gy) in gys.iter().enumerate() {
                let row_w = &inv_dist[y.abs_diff(gy) * w..];
                let row = &grid[gy_i * gw * 3..(gy_i + 1) * gw * 3];
                for (k, q) in row.chunks_exact(3).enumerate() {
                    let wt = row_w[dx_index[k]];
                    norm += wt;
                    acc[0] += wt * (slope * (c[0] - q[0])).clamp(-sat, sat);
                    acc[1] += wt * (slope * (c[1] - q[1])).clamp(-sat, sat);
                    acc[2] += wt * (slope * (c[2] - q[2])).clamp(-sat, sat);
                }
            }
            let i = y * w + x;
            for ch in 0..3 {
                out[ch][i] = if norm > 0.0 { acc[ch] / norm } else { 0.0 };
            }
        }
    }
    out
}

/// White-patch linear scaling of one channel: `[min R, max R] → [0, 255]`.
fn scale_channel(r: &[f64], w: usize, h: usize) -> Plane {
    let (lo, hi) = r
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let data = if hi - lo <= 1e-12 {
        vec![128.0; r.len()]
    } else {
        r.iter().map(|&v| (v - lo) / (hi - lo) * 255.0).collect()
    };
    Plane::from_vec(w, h, data)
}

/// Automatic Color Equalization: local/global chromatic adjustment followed
/// by white-patch scaling to the full range.
pub fn ace(img: &RgbImage, params: &AceParams) -> RgbImage {
    let planes = split_rgb(img);
    let (w, h) = (planes[0].width(), planes[0].height());
    let [r, g, b] = adjust(&planes, params);
    merge_rgb(&[scale_channel(&r, w, h), scale_channel(&g, w, h), scale_channel(&b, w, h)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    /// Direct O(N²) evaluation over every other pixel, for small images.
    fn brute_force(img: &RgbImage, p: &AceParams) -> [Vec<f64>; 3] {
        let (w, h) = (img.width() as i64, img.height() as i64);
        let mut out = [vec![], vec![], vec![]];
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    let ip = img.get_pixel(x as u32, y as u32)[c] as f64 / 255.0;
                    let (mut s, mut n) = (0.0, 0.0);
                    for qy in (0..h).step_by(p.neighbor_stride) {
                        for qx in (0..w).step_by(p.neighbor_stride) {
                            if qx == x && qy == y {
                                continue;
                            }
                            let iq = img.get_pixel(qx as u32, qy as u32)[c] as f64 / 255.0;
                            let d = (((qx - x).pow(2) + (qy - y).pow(2)) as f64).sqrt();
                            s += (p.slope * (ip - iq)).clamp(-p.saturation, p.saturation) / d;
                            n += 1.0 / d;
                        }
                    }
                    out[c].push(s / n);
                }
            }
        }
        out
    }

    fn test_image() -> RgbImage {
        RgbImage::from_fn(9, 7, |x, y| Rgb([(x * 20 + y * 3) as u8, (90 + y * 15) as u8, ((x * y) * 4) as u8]))
    }

    #[test]
    fn matches_direct_sum() {
        let img = test_image();
        let p = AceParams::default();
        let fast = adjust(&split_rgb(&img), &p);
        let slow = brute_force(&img, &p);
        for c in 0..3 {
            for (a, b) in fast[c].iter().zip(&slow[c]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invariant_to_intensity_offset() {
        let img = RgbImage::from_fn(24, 24, |x, y| Rgb([(40 + x * 5) as u8, (60 + y * 4) as u8, (50 + (x ^ y) * 3) as u8]));
        let shifted = RgbImage::from_fn(24, 24, |x, y| {
            let p = img.get_pixel(x, y);
            Rgb([p[0] + 30, p[1] + 30, p[2] + 30])
        });
        let a = ace(&img, &AceParams::default());
        let b = ace(&shifted, &AceParams::default());
        for (pa, pb) in a.pixels().zip(b.pixels()) {
            for c in 0..3 {
                assert!((pa[c] as i32 - pb[c] as i32).abs() <= 1);
            }
        }
    }

    #[test]
    fn stretches_low_contrast() {
        let img = RgbImage::from_fn(16, 16, |x, _| Rgb([(100 + x) as u8; 3]));
        let out = ace(&img, &AceParams::default());
        let min = out.pixels().map(|p| p[0]).min().unwrap();
        let max = out.pixels().map(|p| p[0]).max().unwrap();
        assert_eq!((min, max), (0, 255));
    }
}
