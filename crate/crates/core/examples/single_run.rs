//! Evaluates one pipeline over several random splits of a synthetic dataset,
//! next to the trivial accept/reject/random baselines.
//!
//! ```text
//! cargo run --release --example single_run
//! ```

use std::error::Error;

use crossface::classify::ClassifierKind;
use crossface::dataset::DomainShiftParams;
use crossface::orchestrator::{BuiltinEmbedder, DatasetSource, EmbeddingSource, Experiment};
use crossface::{ExperimentConfig, LayerSelector};

fn main() -> Result<(), Box<dyn Error>> {
    let mut cfg = ExperimentConfig::new(
        DatasetSource::Synthetic {
            n_subjects: 20,
            seed: 3,
            shift: DomainShiftParams {
                color_cast: 0.1,
                illumination_gradient: 0.1,
                noise_sigma: 2.0,
                max_roll_deg: 3.0,
                ..DomainShiftParams::default()
            },
        },
        EmbeddingSource::Builtin(BuiltinEmbedder::Lbp),
    );
    cfg.n_splits = 10;
    cfg.pipeline.layer = LayerSelector::Lbp;
    let experiment = Experiment::in_memory(cfg.clone())?;
    println!("split list {}", &experiment.split_list_fingerprint()[..16]);

    let mut pipelines = vec![cfg.pipeline];
    pipelines.extend(ClassifierKind::BASELINES.map(|k| crossface::PipelineConfig {
        classifier: k,
        ..cfg.pipeline
    }));
    for p in pipelines {
        let outcome = experiment.run_config(&p)?;
        let s = outcome.summary;
        println!(
            "{:<36} median {:.5}  mean {:.5}±{:.5}  min {:.5}  max {:.5}",
            p.key(),
            s.median,
            s.mean,
            s.stddev,
            s.min,
            s.max
        );
    }
    let run = &experiment.run_config(&cfg.pipeline)?.results[0];
    println!(
        "split 0: dev tau {:.4} (EER {:.4}), eval FAR {:.4} FRR {:.4} HTER {:.4}, hyperparameters {}",
        run.dev.tau,
        run.dev.hter,
        run.eval.far,
        run.eval.frr,
        run.eval.hter,
        run.hyper.map(|h| h.to_string()).unwrap_or_default()
    );
    Ok(())
}
