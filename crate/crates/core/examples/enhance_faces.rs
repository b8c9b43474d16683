//! Aligns one subject's two photos to 224×224 eye-leveled crops and saves
//! them after each enhancement method.
//!
//! ```text
//! cargo run --example enhance_faces -- [out_dir]
//! ```

use std::error::Error;
use std::path::PathBuf;

use crossface::dataset::{synthesize_dataset, DomainShiftParams};
use crossface::imaging::{enhance, normalize_geometry, EnhancementKind, EnhancementMethod};

fn main() -> Result<(), Box<dyn Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("crossface_enhance"));
    std::fs::create_dir_all(&out)?;

    let samples = synthesize_dataset(3, 11, &DomainShiftParams::strong_color_cast())?;
    for sample in samples.iter().filter(|s| s.subject_id() == "s001") {
        let aligned = normalize_geometry(sample)?;
        for kind in EnhancementKind::ALL {
            let face = enhance(&aligned, &EnhancementMethod::with_defaults(kind));
            let mean: Vec<f64> = (0..3)
                .map(|c| face.pixels().pixels().map(|p| p[c] as f64).sum::<f64>() / (224.0 * 224.0))
                .collect();
            let path = out.join(format!("{}_{}_{}.png", sample.subject_id(), sample.domain().token(), kind.tag()));
            face.pixels().save(&path)?;
            println!(
                "{:<8} {:<7} mean RGB ({:5.1}, {:5.1}, {:5.1})  {}",
                sample.domain().token(),
                kind.label(),
                mean[0],
                mean[1],
                mean[2],
                path.display()
            );
        }
    }
    Ok(())
}
