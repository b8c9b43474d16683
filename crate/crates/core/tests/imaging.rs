use crossface::dataset::{synthesize_dataset, DomainShiftParams};
use crossface::dataset::{Point, Roi};
use crossface::imaging::{
    enhance, normalize_geometry, AlignmentTransform, EnhancementKind, EnhancementMethod, ALIGNED_SIZE,
};
use crossface::{Domain, FaceSample};
use image::{Rgb, RgbImage};

fn channel_means(img: &RgbImage) -> [f64; 3] {
    let mut m = [0.0; 3];
    for p in img.pixels() {
        for c in 0..3 {
            m[c] += p[c] as f64;
        }
    }
    let n = (img.width() * img.height()) as f64;
    m.map(|v| v / n)
}

#[test]
fn alignment_levels_the_eyes_of_every_synthetic_sample() {
    let samples = synthesize_dataset(8, 21, &DomainShiftParams::default()).unwrap();
    for s in &samples {
        let t = AlignmentTransform::for_sample(s).unwrap();
        let (l, r) = (t.forward(s.left_eye()), t.forward(s.right_eye()));
        assert!((l.y - r.y).abs() < 1e-9, "{:?}: eyes at {l:?} and {r:?}", s.key());
        assert!(l.x < r.x);
        for p in [l, r] {
            assert!((0.0..ALIGNED_SIZE as f64).contains(&p.x) && (0.0..ALIGNED_SIZE as f64).contains(&p.y));
        }
        for p in [Point::new(3.0, 7.0), Point::new(150.0, 90.5)] {
            let back = t.inverse(t.forward(p));
            assert!((back.x - p.x).abs() < 1e-9 && (back.y - p.y).abs() < 1e-9);
        }
    }
}

#[test]
fn rotated_marker_lands_level() {
    // two dots on a 30° line; after alignment both sit in the same row
    let mut img = RgbImage::from_pixel(300, 300, Rgb([0, 0, 0]));
    let (l, r) = (Point::new(120.0, 120.0), Point::new(120.0 + 60.0 * 0.866, 120.0 + 60.0 * 0.5));
    for p in [l, r] {
        for dy in -2..=2 {
            for dx in -2..=2 {
                img.put_pixel((p.x as i32 + dx) as u32, (p.y as i32 + dy) as u32, Rgb([255, 255, 255]));
            }
        }
    }
    let s = FaceSample::new("m", Domain::Selfie, img, Roi::new(80.0, 80.0, 140.0, 140.0), l, r).unwrap();
    let face = normalize_geometry(&s).unwrap();
    let bright: Vec<(u32, u32)> = face
        .pixels()
        .enumerate_pixels()
        .filter(|(_, _, p)| p[0] > 200)
        .map(|(x, y, _)| (x, y))
        .collect();
    let (left, right): (Vec<_>, Vec<_>) = bright.iter().partition(|(x, _)| *x < ALIGNED_SIZE / 2);
    let mean_y = |v: &[(u32, u32)]| v.iter().map(|p| p.1 as f64).sum::<f64>() / v.len() as f64;
    assert!(!left.is_empty() && !right.is_empty());
    assert!((mean_y(&left) - mean_y(&right)).abs() < 1.5);
}

#[test]
fn enhancement_keeps_shape_and_is_deterministic() {
    let samples = synthesize_dataset(3, 2, &DomainShiftParams::default()).unwrap();
    let face = normalize_geometry(&samples[0]).unwrap();
    assert_eq!(face.pixels().dimensions(), (ALIGNED_SIZE, ALIGNED_SIZE));
    assert_eq!(enhance(&face, &EnhancementMethod::None).pixels(), face.pixels());
    for kind in [EnhancementKind::Retinex, EnhancementKind::Clahe, EnhancementKind::Ace] {
        let m = EnhancementMethod::with_defaults(kind);
        let a = enhance(&face, &m);
        assert_eq!(a.pixels().dimensions(), (ALIGNED_SIZE, ALIGNED_SIZE));
        assert_eq!(a.enhancement(), kind);
        assert_eq!(a.source(), face.source());
        assert_eq!(enhance(&face, &m).pixels(), a.pixels());
        assert_ne!(a.pixels(), face.pixels());
    }
}

#[test]
fn ace_reduces_a_strong_color_cast() {
    let samples = synthesize_dataset(3, 6, &DomainShiftParams::strong_color_cast()).unwrap();
    let id = samples.iter().find(|s| s.domain() == Domain::IdDocument).unwrap();
    let face = normalize_geometry(id).unwrap();
    let before = channel_means(face.pixels());
    let after = channel_means(enhance(&face, &EnhancementMethod::with_defaults(EnhancementKind::Ace)).pixels());
    assert!(before[0] - before[2] > 30.0, "{before:?}");
    assert!((after[0] - after[2]).abs() < 0.5 * (before[0] - before[2]), "{before:?} -> {after:?}");
}

#[test]
fn invalid_parameters_are_rejected() {
    let mut m = EnhancementMethod::with_defaults(EnhancementKind::Clahe);
    if let EnhancementMethod::Clahe(p) = &mut m {
        p.tiles_x = 0;
    }
    assert!(m.validate().is_err());
    assert!("sharpen".parse::<EnhancementKind>().is_err());
}
