//! Renders a small synthetic ID-document/selfie dataset, writes it as PNGs
//! with a manifest, reads it back and plans the 60/20/20 subject splits.
//!
//! ```text
//! cargo run --example synth_dataset -- [out_dir]
//! ```

use std::error::Error;
use std::path::PathBuf;

use crossface::dataset::{
    ingest_manifest, plan_split, subject_ids, synthesize_dataset, write_manifest, DomainShiftParams, Partition,
};
use crossface::Label;

fn main() -> Result<(), Box<dyn Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("crossface_synth"));

    let samples = synthesize_dataset(50, 2024, &DomainShiftParams::default())?;
    let manifest = write_manifest(&samples, &out)?;
    println!("{} samples written to {}", samples.len(), manifest.display());

    let loaded = ingest_manifest(&manifest)?;
    assert_eq!(loaded.len(), samples.len());
    let subjects = subject_ids(&loaded);

    let plan = plan_split(&subjects, 7)?;
    for part in [Partition::Train, Partition::Dev, Partition::Eval] {
        let pairs = plan.pairs(part);
        let genuine = pairs.iter().filter(|p| p.label == Label::Genuine).count();
        println!(
            "{part:?}: {} genuine / {} impostor pairs",
            genuine,
            pairs.len() - genuine
        );
    }
    println!(
        "CV folds: {:?} subjects",
        plan.cv_folds.iter().map(Vec::len).collect::<Vec<_>>()
    );
    println!("split fingerprint {}", plan.fingerprint());
    Ok(())
}
