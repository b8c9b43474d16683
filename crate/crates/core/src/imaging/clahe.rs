use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::ImagingError;
use crate::raster::{merge_rgb, Plane};

/// Contrast Limited Adaptive Histogram Equalization parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClaheParams {
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Histogram bins are clipped at `clip_limit × tile_area / 256`.
    /// Non-positive or infinite disables clipping.
    pub clip_limit: f64,
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            tiles_x: 8,
            tiles_y: 8,
            clip_limit: 2.0,
        }
    }
}

impl ClaheParams {
    pub fn validate(&self) -> Result<(), ImagingError> {
        if self.tiles_x == 0 || self.tiles_y == 0 {
            return Err(ImagingError::InvalidParameter {
                method: "clahe",
                message: "tile grid must be at least 1×1".into(),
            });
        }
        if self.clip_limit.is_nan() {
            return Err(ImagingError::InvalidParameter {
                method: "clahe",
                message: "clip limit is NaN".into(),
            });
        }
        Ok(())
    }
}

/// Full-range BT.601 RGB → (Y, Cb, Cr) planes.
pub fn rgb_to_ycbcr(img: &RgbImage) -> [Plane; 3] {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut out = [Plane::new(w, h), Plane::new(w, h), Plane::new(w, h)];
    for (i, p) in img.pixels().enumerate() {
        let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
        let y = 0.299 * r + 0.587 * g + 0.114 * b;
        out[0].data_mut()[i] = y;
        out[1].data_mut()[i] = 128.0 + 0.564 * (b - y);
        out[2].data_mut()[i] = 128.0 + 0.713 * (r - y);
    }
    out
}

/// Inverse of [`rgb_to_ycbcr`], rounded and saturated to 8 bits.
pub fn ycbcr_to_rgb(planes: &[Plane; 3]) -> RgbImage {
    let (w, h) = (planes[0].width(), planes[0].height());
    let mut rgb = [Plane::new(w, h), Plane::new(w, h), Plane::new(w, h)];
    for i in 0..w * h {
        let y = planes[0].data()[i];
        let cb = planes[1].data()[i] - 128.0;
        let cr = planes[2].data()[i] - 128.0;
        rgb[0].data_mut()[i] = y + 1.403 * cr;
        rgb[1].data_mut()[i] = y - 0.714 * cr - 0.344 * cb;
        rgb[2].data_mut()[i] = y + 1.773 * cb;
    }
    merge_rgb(&rgb)
}

/// `[start, end)` bounds of tile `i` of `n` along a side of length `len`.
fn tile_bounds(i: usize, n: usize, len: usize) -> (usize, usize) {
    (i * len / n, (i + 1) * len / n)
}

/// Clips a histogram at `limit` and spreads the excess over all bins:
/// an equal share to every bin, then the remainder one count at a time at
/// evenly spaced bins.
fn clip_histogram(hist: &mut [u32; 256], limit: u32) {
    let mut excess = 0u32;
    for h in hist.iter_mut() {
        if *h > limit {
            excess += *h - limit;
            *h = limit;
        }
    }
    let batch = excess / 256;
    let mut residual = excess % 256;
    for h in hist.iter_mut() {
        *h += batch;
    }
    if residual > 0 {
        let step = (256 / residual as usize).max(1);
        let mut i = 0;
        while i < 256 && residual > 0 {
            hist[i] += 1;
            residual -= 1;
            i += step;
        }
    }
}

/// Equalization lookup table of one tile: `round(cdf(v) · 255 / area)`.
fn tile_lut(luma: &[u8], width: usize, xs: (usize, usize), ys: (usize, usize), clip_limit: f64) -> [f64; 256] {
    let mut hist = [0u32; 256];
    for y in ys.0..ys.1 {
        for &v in &luma[y * width + xs.0..y * width + xs.1] {
            hist[v as usize] += 1;
        }
    }
    let area = ((xs.1 - xs.0) * (ys.1 - ys.0)) as u32;
    if clip_limit > 0.0 && clip_limit.is_finite() {
        let limit = ((clip_limit * area as f64 / 256.0) as u32).max(1);
        clip_histogram(&mut hist, limit);
    }
    let scale = 255.0 / area.max(1) as f64;
    let mut lut = [0.0; 256];
    let mut cdf = 0u32;
    for (v, &h) in hist.iter().enumerate() {
        cdf += h;
        lut[v] = (cdf as f64 * scale).round().min(255.0);
    }
    lut
}

/// CLAHE on the luma plane with bilinear interpolation between the mappings
/// of the four nearest tile centers; chroma is carried through unchanged.
pub fn clahe(img: &RgbImage, params: &ClaheParams) -> RgbImage {
    let [luma, cb, cr] = rgb_to_ycbcr(img);
    let (w, h) = (luma.width(), luma.height());
    let (nx, ny) = (params.tiles_x.min(w), params.tiles_y.min(h));
    let quantized: Vec<u8> = luma.data().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8).collect();

    let luts: Vec<[f64; 256]> = (0..ny)
        .flat_map(|ty| (0..nx).map(move |tx| (tx, ty)))
        .map(|(tx, ty)| tile_lut(&quantized, w, tile_bounds(tx, nx, w), tile_bounds(ty, ny, h), params.clip_limit))
        .collect();

    // position of a pixel in tile-center coordinates
    let coord = |p: usize, n: usize, len: usize| {
        let f = (p as f64 + 0.5) * n as f64 / len as f64 - 0.5;
        let i0 = f.floor();
        let t = f - i0;
        let i0 = i0 as isize;
        let lo = i0.clamp(0, n as isize - 1) as usize;
        let hi = (i0 + 1).clamp(0, n as isize - 1) as usize;
        (lo, hi, t)
    };
    let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);

    let mut out = Plane::new(w, h);
    for y in 0..h {
        let (ty0, ty1, fy) = coord(y, ny, h);
        for x in 0..w {
            let (tx0, tx1, fx) = coord(x, nx, w);
            let v = quantized[y * w + x] as usize;
            let top = lerp(luts[ty0 * nx + tx0][v], luts[ty0 * nx + tx1][v], fx);
            let bottom = lerp(luts[ty1 * nx + tx0][v], luts[ty1 * nx + tx1][v], fx);
            out.set(x, y, lerp(top, bottom, fy));
        }
    }
    ycbcr_to_rgb(&[out, cb, cr])
}
