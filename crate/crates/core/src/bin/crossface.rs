use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crossface::classify::GridDensity;
use crossface::dataset::{ingest_manifest, subject_ids, synthesize_dataset, write_manifest, DomainShiftParams};
use crossface::embedding::{write_emb1, LayerSelector};
use crossface::imaging::{EnhancementKind, ALIGNED_SIZE};
use crossface::orchestrator::{
    load_dataset, median_run, read_results, render_report, write_det_for_run, write_reports, BuiltinEmbedder,
    EmbeddingSource, EnhancementParams, Experiment, FeatureStore, OptimizationReport,
    OrchestratorError, RESULTS_FILE,
};
use crossface::{ExperimentConfig, PipelineConfig};

#[derive(Parser)]
#[command(name = "crossface", version, about = "Cross-domain face verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Experiment config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random splits.
    #[arg(long)]
    splits: Option<usize>,
    #[arg(long, value_enum)]
    grid: Option<Grid>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Grid {
    Coarse,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shift {
    None,
    Default,
    Strong,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic two-domain dataset as PNGs plus manifest.csv.
    Synth {
        #[arg(long, default_value_t = 50)]
        subjects: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Shift::Default)]
        shift: Shift,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a manifest; optionally dump aligned (and enhanced) crops.
    Ingest {
        manifest: PathBuf,
        /// Directory for `<subject>_<domain>_<enhancement>.png` crops.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Enhancements applied to the dumped crops.
        #[arg(long, value_delimiter = ',', default_value = "none")]
        enhancement: Vec<EnhancementKind>,
    },
    /// Compute built-in embeddings and write one EMB1 file per layer.
    Embed {
        /// Config whose dataset, embedder and enhancement parameters are used.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "none")]
        enhancement: EnhancementKind,
        /// Stored layers to write (`lbp`/`dct` for the descriptor itself).
        #[arg(long, value_delimiter = ',', default_value = "fc6n,fc7n,fc8")]
        layers: Vec<LayerSelector>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one pipeline on every split.
    Run {
        #[command(flatten)]
        overrides: Overrides,
        /// Pipeline as `enhancement/layer/normalization/combination/classifier`;
        /// defaults to the config's pipeline.
        #[arg(long)]
        pipeline: Option<String>,
    },
    /// Greedy stage-by-stage optimization with reports.
    Greedy {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Regenerate tables and DET files from a finished greedy run.
    Report {
        /// Directory holding optimization.json and results.jsonl.
        #[arg(long)]
        out: PathBuf,
    },
    /// DET CSV of one stored run (the median run unless --split is given).
    Det {
        /// Directory holding results.jsonl.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pipeline: String,
        #[arg(long)]
        split: Option<usize>,
        /// Master seed for the median-run pick.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; defaults to `det_<pipeline>.csv` in the results directory.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

fn load_config(o: &Overrides) -> Result<ExperimentConfig, OrchestratorError> {
    let mut cfg = ExperimentConfig::load(&o.config)?;
    if let Some(s) = o.seed {
        cfg.master_seed = s;
    }
    if let Some(n) = o.splits {
        cfg.n_splits = n;
    }
    if let Some(g) = o.grid {
        cfg.grid = match g {
            Grid::Coarse => GridDensity::Coarse,
            Grid::Full => GridDensity::Full,
        };
    }
    if let Some(j) = o.jobs {
        cfg.jobs = j;
    }
    if let Some(out) = &o.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn synth(subjects: usize, seed: u64, shift: Shift, out: &Path) -> Result<(), OrchestratorError> {
    let params = match shift {
        Shift::None => DomainShiftParams::none(),
        Shift::Default => DomainShiftParams::default(),
        Shift::Strong => DomainShiftParams::strong_color_cast(),
    };
    let samples = synthesize_dataset(subjects, seed, &params)?;
    let manifest = write_manifest(&samples, out)?;
    println!("wrote {} samples and {}", samples.len(), manifest.display());
    Ok(())
}

fn ingest(manifest: &Path, out: Option<&Path>, enhancements: &[EnhancementKind]) -> Result<(), OrchestratorError> {
    let samples = ingest_manifest(manifest)?;
    println!(
        "{}: {} samples, {} subjects",
        manifest.display(),
        samples.len(),
        subject_ids(&samples).len()
    );
    let Some(out) = out else { return Ok(()) };
    fs::create_dir_all(out).map_err(|e| OrchestratorError::io(out, e))?;
    let store = FeatureStore::new(
        samples,
        EmbeddingSource::Builtin(BuiltinEmbedder::Lbp),
        EnhancementParams::default(),
        0,
    );
    for &kind in enhancements {
        for face in store.enhanced(kind).iter() {
            let face = face.as_ref().map_err(|e| OrchestratorError::Run(e.clone()))?;
            let key = face.source();
            let path = out.join(format!("{}_{}_{}.png", key.subject, key.domain.token(), kind.tag()));
            face.pixels()
                .save(&path)
                .map_err(|e| OrchestratorError::io(&path, std::io::Error::other(e)))?;
        }
    }
    println!("wrote {ALIGNED_SIZE}×{ALIGNED_SIZE} crops to {}", out.display());
    Ok(())
}

fn embed(config: &Path, enhancement: EnhancementKind, layers: &[LayerSelector], out: &Path) -> Result<(), OrchestratorError> {
    let cfg = ExperimentConfig::load(config)?;
    let EmbeddingSource::Builtin(embedder) = cfg.embeddings else {
        return Err(OrchestratorError::Config("embed needs built-in embeddings in the config".into()));
    };
    let samples = load_dataset(&cfg.dataset)?;
    let store = FeatureStore::new(samples, cfg.embeddings.clone(), cfg.enhancement_params.clone(), cfg.surrogate_seed);
    fs::create_dir_all(out).map_err(|e| OrchestratorError::io(out, e))?;
    for &layer in layers {
        let layer = layer.stored();
        if !layer.is_network_layer() && layer != embedder.layer() {
            return Err(OrchestratorError::Config(format!(
                "layer {layer} needs the {layer} embedder"
            )));
        }
        let vectors = store.layer_vectors(enhancement, layer)?;
        let path = out.join(format!("{}_{}.emb1", enhancement.tag(), layer.tag()));
        write_emb1(&path, layer, &vectors)?;
        println!("{}: {} vectors of dimension {}", path.display(), vectors.len(), vectors[0].dim());
    }
    Ok(())
}

fn run(overrides: &Overrides, pipeline: Option<&str>) -> Result<(), OrchestratorError> {
    let cfg = load_config(overrides)?;
    let pipeline = match pipeline {
        Some(key) => PipelineConfig::parse_key(key)?,
        None => cfg.pipeline,
    };
    let out = cfg.output_dir.clone();
    let experiment = Experiment::open(cfg)?;
    let outcome = experiment.run_config(&pipeline)?;
    let s = outcome.summary;
    println!("{pipeline}: {} runs, {} failed", s.n, outcome.failures.len());
    println!(
        "median {:.5}  mean {:.5}±{:.5}  min {:.5}  max {:.5}",
        s.median, s.mean, s.stddev, s.min, s.max
    );
    let path = out.join("summary.json");
    let json = serde_json::json!({ "pipeline": pipeline, "summary": s, "split_list_fingerprint": experiment.split_list_fingerprint() });
    fs::write(&path, serde_json::to_string_pretty(&json).expect("summary serializes") + "\n")
        .map_err(|e| OrchestratorError::io(&path, e))
}

fn greedy(overrides: &Overrides) -> Result<(), OrchestratorError> {
    let cfg = load_config(overrides)?;
    let out = cfg.output_dir.clone();
    let experiment = Experiment::open(cfg)?;
    let report = experiment.greedy()?;
    let runs = read_results(&out.join(RESULTS_FILE))?;
    write_reports(&out, &report, &runs)?;
    print!("{}", render_report(&report));
    Ok(())
}

fn report(out: &Path) -> Result<(), OrchestratorError> {
    let path = out.join("optimization.json");
    let text = fs::read_to_string(&path).map_err(|e| OrchestratorError::io(&path, e))?;
    let report: OptimizationReport = serde_json::from_str(&text).map_err(|e| OrchestratorError::Corrupt {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let runs = read_results(&out.join(RESULTS_FILE))?;
    if runs.is_empty() {
        return Err(OrchestratorError::NoResults(out.join(RESULTS_FILE).display().to_string()));
    }
    write_reports(out, &report, &runs)?;
    print!("{}", render_report(&report));
    Ok(())
}

fn det(out: &Path, pipeline: &str, split: Option<usize>, seed: u64, file: Option<&Path>) -> Result<(), OrchestratorError> {
    let config = PipelineConfig::parse_key(pipeline)?;
    let runs = read_results(&out.join(RESULTS_FILE))?;
    let run = match split {
        Some(i) => runs.iter().find(|r| r.config == config && r.split_index == i),
        None => median_run(&runs, &config, seed),
    }
    .ok_or_else(|| OrchestratorError::NoResults(config.key()))?;
    let path = file
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.join(format!("det_{}.csv", config.key().replace('/', "_"))));
    write_det_for_run(&path, run)?;
    println!(
        "{}: split {} (eval HTER {:.5})",
        path.display(),
        run.split_index,
        run.eval_hter()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth { subjects, seed, shift, out } => synth(*subjects, *seed, *shift, out),
        Command::Ingest { manifest, out, enhancement } => ingest(manifest, out.as_deref(), enhancement),
        Command::Embed {
            config,
            enhancement,
            layers,
            out,
        } => embed(config, *enhancement, layers, out),
        Command::Run { overrides, pipeline } => run(overrides, pipeline.as_deref()),
        Command::Greedy { overrides } => greedy(overrides),
        Command::Report { out } => report(out),
        Command::Det {
            out,
            pipeline,
            split,
            seed,
            file,
        } => det(out, pipeline, *split, *seed, file.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

