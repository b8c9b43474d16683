use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::ImagingError;
use crate::raster::{merge_rgb, split_rgb, Plane};

/// Single-scale Retinex parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetinexParams {
    /// Surround Gaussian σ in pixels.
    pub sigma: f64,
    /// Lower clip percentile (in percent).
    pub low_percentile: f64,
    /// Upper clip percentile (in percent).
    pub high_percentile: f64,
}

impl Default for RetinexParams {
    fn default() -> Self {
        RetinexParams {
            sigma: 100.0,
            low_percentile: 1.0,
            high_percentile: 99.0,
        }
    }
}

impl RetinexParams {
    pub fn validate(&self) -> Result<(), ImagingError> {
        let bad = |message: String| Err(ImagingError::InvalidParameter { method: "retinex", message });
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(0.0 <= self.low_percentile && self.low_percentile < self.high_percentile && self.high_percentile <= 100.0) {
            return bad("percentiles must satisfy 0 <= low < high <= 100".into());
        }
        Ok(())
    }
}

/// Nearest-rank percentile of an already sorted slice.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * (sorted.len() - 1) as f64).round() as usize;
    sorted[rank.min(sorted.len() - 1)]
}

fn retinex_channel(plane: &Plane, p: &RetinexParams) -> Plane {
    let surround = plane.gaussian_blur(p.sigma);
    let reflectance: Vec<f64> = plane
        .data()
        .iter()
        .zip(surround.data())
        .map(|(&i, &s)| (i + 1.0).ln() - (s + 1.0).ln())
        .collect();
    let mut sorted = reflectance.clone();
    sorted.sort_by(f64::total_cmp);
    let lo = percentile(&sorted, p.low_percentile);
    let hi = percentile(&sorted, p.high_percentile);
    let data = if hi - lo <= 1e-9 {
        // uniform log ratio: nothing to stretch
        vec![128.0; reflectance.len()]
    } else {
        reflectance
            .iter()
            .map(|&r| ((r - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0)
            .collect()
    };
    Plane::from_vec(plane.width(), plane.height(), data)
}

/// Per-channel single-scale Retinex, `log(I + 1) - log(G_σ * I + 1)`,
/// followed by a percentile-clipped linear stretch to `[0, 255]`.
pub fn retinex(img: &RgbImage, params: &RetinexParams) -> RgbImage {
    let [r, g, b] = split_rgb(img);
    merge_rgb(&[
        retinex_channel(&r, params),
        retinex_channel(&g, params),
        retinex_channel(&b, params),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (0..101).map(f64::from).collect();
        assert_eq!(percentile(&v, 1.0), 1.0);
        assert_eq!(percentile(&v, 99.0), 99.0);
        assert_eq!(percentile(&v, 100.0), 100.0);
    }

    #[test]
    fn removes_smooth_illumination() {
        // a texture under a strong left-to-right illumination ramp
        let img = RgbImage::from_fn(64, 64, |x, y| {
            let tex = if (x / 4 + y / 4) % 2 == 0 { 1.0 } else { 0.6 };
            let light = 0.3 + 0.7 * x as f64 / 63.0;
            Rgb([(200.0 * tex * light) as u8; 3])
        });
        let out = retinex(&img, &RetinexParams { sigma: 8.0, ..Default::default() });
        let mean_col = |im: &RgbImage, x0: u32| {
            let mut s = 0.0;
            for y in 0..64 {
                for x in x0..x0 + 8 {
                    s += im.get_pixel(x, y)[0] as f64;
                }
            }
            s / 512.0
        };
        let before = mean_col(&img, 56) - mean_col(&img, 8);
        let after = mean_col(&out, 56) - mean_col(&out, 8);
        assert!(after.abs() < 0.5 * before.abs(), "before {before}, after {after}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RetinexParams { sigma: 0.0, ..Default::default() }.validate().is_err());
        assert!(RetinexParams { low_percentile: 50.0, high_percentile: 40.0, ..Default::default() }
            .validate()
            .is_err());
        assert!(RetinexParams::default().validate().is_ok());
    }
}
