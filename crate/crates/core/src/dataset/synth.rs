//! Procedural cross-domain face data.
//!
//! Each subject gets a latent identity (face geometry, skin and hair tone,
//! facial-feature placement, a handful of marks and a fine skin texture).
//! The same identity is rendered twice: once as a photographed ID document
//! (warm color cast, optical blur, a print/scan downscale-upscale cycle) and
//! once as a selfie (lateral illumination gradient, sensor noise, a small
//! head roll). Eye centers are emitted analytically.

use image::RgbImage;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DatasetError, Domain, FaceSample, Point, Roi};
use crate::raster::{merge_rgb, Plane};
use crate::rng::{derive_seed, seeded};

const WIDTH: usize = 200;
const HEIGHT: usize = 240;

/// Strength of the simulated acquisition differences between the domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainShiftParams {
    /// Warm cast on the ID rendering: red gain `1 + c`, blue gain `1 - c`.
    pub color_cast: f64,
    /// Gaussian blur σ (px) on the ID rendering.
    pub blur_sigma: f64,
    /// Scale of the ID downscale-upscale cycle, in `(0, 1]`; 1 disables it.
    pub downscale: f64,
    /// Selfie illumination gain varies linearly from `1 - g` (left) to `1 + g` (right).
    pub illumination_gradient: f64,
    /// Additive Gaussian noise σ (intensity levels) on the selfie.
    pub noise_sigma: f64,
    /// Selfie head roll drawn uniformly from `±max_roll_deg`.
    pub max_roll_deg: f64,
}

impl Default for DomainShiftParams {
    fn default() -> Self {
        DomainShiftParams {
            color_cast: 0.25,
            blur_sigma: 1.5,
            downscale: 0.5,
            illumination_gradient: 0.35,
            noise_sigma: 6.0,
            max_roll_deg: 8.0,
        }
    }
}

impl DomainShiftParams {
    /// No shift at all: both renderings of a subject are identical.
    pub fn none() -> Self {
        DomainShiftParams {
            color_cast: 0.0,
            blur_sigma: 0.0,
            downscale: 1.0,
            illumination_gradient: 0.0,
            noise_sigma: 0.0,
            max_roll_deg: 0.0,
        }
    }

    /// Default shift with a strong color cast and illumination gradient.
    pub fn strong_color_cast() -> Self {
        DomainShiftParams {
            color_cast: 0.6,
            illumination_gradient: 0.6,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Blob {
    x: f64,
    y: f64,
    sx: f64,
    sy: f64,
    color: [f64; 3],
}

impl Blob {
    #[inline]
    fn weight(&self, x: f64, y: f64) -> f64 {
        let dx = (x - self.x) / self.sx;
        let dy = (y - self.y) / self.sy;
        let q = dx * dx + dy * dy;
        if q > 18.0 {
            0.0
        } else {
            (-0.5 * q).exp()
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Grating {
    fx: f64,
    fy: f64,
    phase: f64,
    amplitude: f64,
}

/// Latent identity of one synthetic subject, in canonical (unrolled) image
/// coordinates.
#[derive(Clone, Debug)]
struct Identity {
    cx: f64,
    cy: f64,
    ax: f64,
    ay: f64,
    eye_y: f64,
    iod: f64,
    skin: [f64; 3],
    hair: [f64; 3],
    hairline: f64,
    background: [f64; 3],
    blobs: Vec<Blob>,
    gratings: Vec<Grating>,
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

impl Identity {
    fn sample(rng: &mut ChaCha8Rng) -> Identity {
        let cx = WIDTH as f64 / 2.0 + uniform(rng, -6.0, 6.0);
        let cy = HEIGHT as f64 / 2.0 + 6.0 + uniform(rng, -6.0, 6.0);
        let ax = 60.0 + uniform(rng, -6.0, 6.0);
        let ay = 80.0 + uniform(rng, -6.0, 6.0);
        let eye_y = cy - 0.22 * ay + uniform(rng, -4.0, 4.0);
        let iod = 52.0 + uniform(rng, -8.0, 8.0);

        let tone = uniform(rng, -45.0, 35.0);
        let skin = [
            205.0 + tone + uniform(rng, -10.0, 10.0),
            165.0 + 0.9 * tone + uniform(rng, -10.0, 10.0),
            135.0 + 0.8 * tone + uniform(rng, -10.0, 10.0),
        ];
        let h = uniform(rng, 20.0, 120.0);
        let hair = [h, 0.8 * h, 0.6 * h];
        let background = [
            uniform(rng, 150.0, 220.0),
            uniform(rng, 150.0, 220.0),
            uniform(rng, 150.0, 220.0),
        ];

        let mut blobs = Vec::new();
        let eye_sigma = uniform(rng, 3.5, 5.5);
        let eye_dark = uniform(rng, 90.0, 140.0);
        let brow_y = eye_y - uniform(rng, 11.0, 17.0);
        let brow_sx = uniform(rng, 7.0, 13.0);
        let brow_dark = uniform(rng, 50.0, 110.0);
        for side in [-1.0, 1.0] {
            let ex = cx + side * iod / 2.0;
            blobs.push(Blob {
                x: ex,
                y: eye_y,
                sx: eye_sigma * 1.4,
                sy: eye_sigma,
                color: [-eye_dark; 3],
            });
            blobs.push(Blob {
                x: ex + side * uniform(rng, -2.0, 2.0),
                y: brow_y,
                sx: brow_sx,
                sy: 2.5,
                color: [-brow_dark; 3],
            });
        }
        let nose_y = eye_y + uniform(rng, 24.0, 36.0);
        blobs.push(Blob {
            x: cx + uniform(rng, -2.0, 2.0),
            y: nose_y,
            sx: uniform(rng, 4.0, 7.0),
            sy: uniform(rng, 7.0, 11.0),
            color: [-uniform(rng, 25.0, 50.0), -30.0, -30.0],
        });
        let mouth_y = nose_y + uniform(rng, 20.0, 28.0);
        blobs.push(Blob {
            x: cx + uniform(rng, -2.0, 2.0),
            y: mouth_y,
            sx: uniform(rng, 10.0, 18.0),
            sy: uniform(rng, 2.5, 4.5),
            color: [-uniform(rng, 20.0, 60.0), -uniform(rng, 60.0, 90.0), -uniform(rng, 50.0, 80.0)],
        });
        for _ in 0..10 {
            let r = uniform(rng, 0.0, 0.8).sqrt();
            let t = uniform(rng, 0.0, std::f64::consts::TAU);
            let s = uniform(rng, 1.5, 4.0);
            let a = uniform(rng, 25.0, 60.0) * if rng.gen_bool(0.6) { -1.0 } else { 1.0 };
            blobs.push(Blob {
                x: cx + r * t.cos() * ax,
                y: cy + r * t.sin() * ay,
                sx: s,
                sy: s,
                color: [a, 0.9 * a, 0.8 * a],
            });
        }
        let gratings = (0..2)
            .map(|_| {
                let f = uniform(rng, 0.08, 0.25);
                let t = uniform(rng, 0.0, std::f64::consts::PI);
                Grating {
                    fx: f * t.cos(),
                    fy: f * t.sin(),
                    phase: uniform(rng, 0.0, std::f64::consts::TAU),
                    amplitude: uniform(rng, 6.0, 10.0),
                }
            })
            .collect();

        Identity {
            cx,
            cy,
            ax,
            ay,
            eye_y,
            iod,
            skin,
            hair,
            hairline: uniform(rng, -0.65, -0.45),
            background,
            blobs,
            gratings,
        }
    }

    fn eye_midpoint(&self) -> Point {
        Point::new(self.cx, self.eye_y)
    }

    /// Color at a canonical-frame location.
    fn shade(&self, x: f64, y: f64) -> [f64; 3] {
        let dx = (x - self.cx) / self.ax;
        let dy = (y - self.cy) / self.ay;
        let r = (dx * dx + dy * dy).sqrt();
        let face = 1.0 / (1.0 + ((r - 1.0) / 0.025).exp());

        let mut skin = self.skin;
        // soft shading toward the jaw and the cheeks
        let shade = 1.0 - 0.12 * r * r;
        skin.iter_mut().for_each(|v| *v *= shade);
        let texture: f64 = self
            .gratings
            .iter()
            .map(|g| g.amplitude * (std::f64::consts::TAU * (g.fx * x + g.fy * y) + g.phase).sin())
            .sum();
        for b in &self.blobs {
            let w = b.weight(x, y);
            if w > 0.0 {
                for c in 0..3 {
                    skin[c] += w * b.color[c];
                }
            }
        }
        let hair_mix = 1.0 / (1.0 + ((dy - self.hairline) / 0.03).exp());
        let mut px = [0.0; 3];
        for c in 0..3 {
            let inner = (skin[c] + texture) * (1.0 - hair_mix) + self.hair[c] * hair_mix;
            px[c] = self.background[c] * (1.0 - face) + inner * face;
        }
        px
    }

    /// Renders with a roll of `roll` radians about the eye midpoint and
    /// returns the planes together with the annotations.
    fn render(&self, roll: f64) -> ([Plane; 3], Roi, Point, Point) {
        let m = self.eye_midpoint();
        let (s, c) = roll.sin_cos();
        let mut planes = [
            Plane::new(WIDTH, HEIGHT),
            Plane::new(WIDTH, HEIGHT),
            Plane::new(WIDTH, HEIGHT),
        ];
        for y in 0..HEIGHT {
            for x in 0..WIDTH {
                // inverse rotation back to the canonical frame
                let (ux, uy) = (x as f64 - m.x, y as f64 - m.y);
                let px = self.shade(m.x + c * ux + s * uy, m.y - s * ux + c * uy);
                for k in 0..3 {
                    planes[k].set(x, y, px[k]);
                }
            }
        }
        let rotate = |p: Point| {
            let (ux, uy) = (p.x - m.x, p.y - m.y);
            Point::new(m.x + c * ux - s * uy, m.y + s * ux + c * uy)
        };
        let left = rotate(Point::new(self.cx - self.iod / 2.0, self.eye_y));
        let right = rotate(Point::new(self.cx + self.iod / 2.0, self.eye_y));
        let center = rotate(Point::new(self.cx, self.cy));
        let hx = 0.85 * (self.ax * self.ax * c * c + self.ay * self.ay * s * s).sqrt();
        let hy = 0.85 * (self.ax * self.ax * s * s + self.ay * self.ay * c * c).sqrt();
        let roi = Roi::new(center.x - hx, center.y - hy, 2.0 * hx, 2.0 * hy);
        (planes, roi, left, right)
    }
}

fn id_document_shift(planes: &mut [Plane; 3], shift: &DomainShiftParams) {
    let gains = [1.0 + shift.color_cast, 1.0 + 0.3 * shift.color_cast, 1.0 - shift.color_cast];
    for (plane, gain) in planes.iter_mut().zip(gains) {
        let mut p = plane.map(|v| v * gain);
        if shift.blur_sigma > 0.0 {
            p = p.gaussian_blur(shift.blur_sigma);
        }
        if shift.downscale > 0.0 && shift.downscale < 1.0 {
            let w = ((WIDTH as f64 * shift.downscale).round() as usize).max(1);
            let h = ((HEIGHT as f64 * shift.downscale).round() as usize).max(1);
            p = p.resize_bilinear(w, h).resize_bilinear(WIDTH, HEIGHT);
        }
        *plane = p;
    }
}

fn selfie_shift(planes: &mut [Plane; 3], shift: &DomainShiftParams, rng: &mut ChaCha8Rng) {
    let g = shift.illumination_gradient;
    let noise = (shift.noise_sigma > 0.0).then(|| Normal::new(0.0, shift.noise_sigma).expect("finite σ"));
    for y in 0..HEIGHT {
        for x in 0..WIDTH {
            let gain = 1.0 + g * (2.0 * x as f64 / (WIDTH - 1) as f64 - 1.0);
            for plane in planes.iter_mut() {
                let mut v = plane.get(x, y) * gain;
                if let Some(n) = &noise {
                    v += n.sample(rng);
                }
                plane.set(x, y, v);
            }
        }
    }
}

fn to_image(planes: &[Plane; 3]) -> RgbImage {
    merge_rgb(planes)
}

/// Generates `n_subjects` subjects with one ID-document and one selfie
/// sample each. The output is a pure function of the arguments.
pub fn synthesize_dataset(
    n_subjects: usize,
    seed: u64,
    shift: &DomainShiftParams,
) -> Result<Vec<FaceSample>, DatasetError> {
    if n_subjects < 3 {
        return Err(DatasetError::TooFewSubjects {
            needed: 3,
            got: n_subjects,
        });
    }
    let mut samples = Vec::with_capacity(2 * n_subjects);
    for i in 0..n_subjects {
        let mut rng = seeded(derive_seed(seed, i as u64));
        let identity = Identity::sample(&mut rng);
        let subject = format!("s{:03}", i + 1);

        let (mut id_planes, roi, l, r) = identity.render(0.0);
        id_document_shift(&mut id_planes, shift);
        samples.push(
            FaceSample::new(subject.clone(), Domain::IdDocument, to_image(&id_planes), roi, l, r)
                .expect("synthetic annotations are valid by construction"),
        );

        let max_roll = shift.max_roll_deg.to_radians();
        let roll = if max_roll > 0.0 {
            uniform(&mut rng, -max_roll, max_roll)
        } else {
            0.0
        };
        let (mut selfie_planes, roi, l, r) = identity.render(roll);
        selfie_shift(&mut selfie_planes, shift, &mut rng);
        samples.push(
            FaceSample::new(subject, Domain::Selfie, to_image(&selfie_planes), roi, l, r)
                .expect("synthetic annotations are valid by construction"),
        );
    }
    Ok(samples)
}
