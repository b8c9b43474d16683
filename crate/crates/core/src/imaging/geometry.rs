use super::{AlignedFace, ImagingError};
use crate::dataset::{FaceSample, Point, Roi};
use crate::raster::{merge_rgb, split_rgb, Plane};

/// Side length of every aligned face.
pub const ALIGNED_SIZE: u32 = 224;

/// Fraction by which each side of the detected face region is pushed out.
pub const ROI_EXPANSION: f64 = 0.22;

/// Maps source-image coordinates to aligned-face coordinates: rotation about
/// the eye midpoint that levels the eye line, then crop of the expanded ROI
/// and scaling to 224×224.
///
/// Coordinates are continuous, with pixel `i` covering `[i, i + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignmentTransform {
    /// Eye-line angle in the source image (radians, y pointing down).
    pub angle: f64,
    pub pivot: Point,
    /// Expanded, clamped ROI in the rotated frame.
    pub crop: Roi,
}

impl AlignmentTransform {
    pub fn for_sample(sample: &FaceSample) -> Result<Self, ImagingError> {
        let (l, r) = (sample.left_eye(), sample.right_eye());
        let (dx, dy) = (r.x - l.x, r.y - l.y);
        if dx.hypot(dy) < 1e-9 {
            return Err(ImagingError::CoincidentEyes(sample.key()));
        }
        let roi = sample.roi();
        let (ex, ey) = (ROI_EXPANSION * roi.w, ROI_EXPANSION * roi.h);
        let img = sample.image();
        let crop = Roi::new(roi.x - ex, roi.y - ey, roi.w + 2.0 * ex, roi.h + 2.0 * ey)
            .clamp_to(img.width() as f64, img.height() as f64);
        if crop.area() <= 0.0 {
            return Err(ImagingError::DegenerateRoi(sample.key()));
        }
        Ok(AlignmentTransform {
            angle: dy.atan2(dx),
            pivot: Point::new((l.x + r.x) / 2.0, (l.y + r.y) / 2.0),
            crop,
        })
    }

    /// Source point → rotated (eye-leveled) frame.
    pub fn rotate(&self, p: Point) -> Point {
        let (s, c) = (-self.angle).sin_cos();
        let (ux, uy) = (p.x - self.pivot.x, p.y - self.pivot.y);
        Point::new(self.pivot.x + c * ux - s * uy, self.pivot.y + s * ux + c * uy)
    }

    /// Rotated frame → source point.
    pub fn unrotate(&self, p: Point) -> Point {
        let (s, c) = self.angle.sin_cos();
        let (ux, uy) = (p.x - self.pivot.x, p.y - self.pivot.y);
        Point::new(self.pivot.x + c * ux - s * uy, self.pivot.y + s * ux + c * uy)
    }

    /// Source point → aligned-face point.
    pub fn forward(&self, p: Point) -> Point {
        let q = self.rotate(p);
        let n = ALIGNED_SIZE as f64;
        Point::new((q.x - self.crop.x) * n / self.crop.w, (q.y - self.crop.y) * n / self.crop.h)
    }

    /// Aligned-face point → source point.
    pub fn inverse(&self, p: Point) -> Point {
        let n = ALIGNED_SIZE as f64;
        self.unrotate(Point::new(
            self.crop.x + p.x * self.crop.w / n,
            self.crop.y + p.y * self.crop.h / n,
        ))
    }
}

/// Crops, levels and resizes a sample to a 224×224 face.
///
/// Every output pixel center is pulled back through [`AlignmentTransform`]
/// and sampled bilinearly; locations outside the source clamp to the edge.
pub fn normalize_geometry(sample: &FaceSample) -> Result<AlignedFace, ImagingError> {
    let t = AlignmentTransform::for_sample(sample)?;
    let src = split_rgb(sample.image());
    let n = ALIGNED_SIZE as usize;
    let mut out = [Plane::new(n, n), Plane::new(n, n), Plane::new(n, n)];
    for v in 0..n {
        for u in 0..n {
            let s = t.inverse(Point::new(u as f64 + 0.5, v as f64 + 0.5));
            for c in 0..3 {
                out[c].set(u, v, src[c].sample_bilinear(s.x - 0.5, s.y - 0.5));
            }
        }
    }
    Ok(AlignedFace::new(merge_rgb(&out), sample.key()))
}
