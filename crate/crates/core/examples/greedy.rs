//! Greedy pipeline optimization on a synthetic dataset with reduced stage
//! menus, writing the per-stage tables, Dunn matrices and DET files.
//!
//! ```text
//! cargo run --release --example greedy -- [out_dir]
//! ```

use std::error::Error;
use std::path::PathBuf;

use crossface::classify::ClassifierKind;
use crossface::dataset::DomainShiftParams;
use crossface::imaging::EnhancementKind;
use crossface::orchestrator::{
    read_results, render_report, write_reports, BuiltinEmbedder, DatasetSource, EmbeddingSource, Experiment,
    RESULTS_FILE,
};
use crossface::vectorops::{CombineMethod, NormMethod};
use crossface::{ExperimentConfig, LayerSelector};

fn main() -> Result<(), Box<dyn Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("crossface_greedy"));

    let mut cfg = ExperimentConfig::new(
        DatasetSource::Synthetic {
            n_subjects: 15,
            seed: 21,
            shift: DomainShiftParams::default(),
        },
        EmbeddingSource::Builtin(BuiltinEmbedder::Lbp),
    );
    cfg.n_splits = 5;
    cfg.output_dir = out.clone();
    cfg.menus.enhancement = vec![EnhancementKind::None, EnhancementKind::Clahe];
    cfg.menus.layer = vec![LayerSelector::Fc7n, LayerSelector::Fc7];
    cfg.menus.normalization = NormMethod::ALL.to_vec();
    cfg.menus.combination = vec![CombineMethod::AbsSub, CombineMethod::Mult];
    cfg.menus.classifier = vec![ClassifierKind::LinearSvm, ClassifierKind::LogReg];

    let experiment = Experiment::open(cfg)?;
    let report = experiment.greedy()?;
    let written = write_reports(&out, &report, &read_results(&out.join(RESULTS_FILE))?)?;
    print!("{}", render_report(&report));
    println!();
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
