use std::fs;

use crossface::classify::ClassifierKind;
use crossface::dataset::DomainShiftParams;
use crossface::embedding::LayerSelector;
use crossface::orchestrator::{
    read_results, run_single, run_single_audited, write_reports, BuiltinEmbedder, DatasetSource, EmbeddingSource,
    Experiment, LabelAudit, StageMenus, RESULTS_FILE,
};
use crossface::vectorops::{CombineMethod, NormMethod};
use crossface::{ExperimentConfig, Label, PipelineConfig};

fn config(n_subjects: usize, shift: DomainShiftParams, n_splits: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        DatasetSource::Synthetic {
            n_subjects,
            seed: 3,
            shift,
        },
        EmbeddingSource::Builtin(BuiltinEmbedder::Lbp),
    );
    cfg.n_splits = n_splits;
    cfg.master_seed = 17;
    cfg.pipeline = PipelineConfig {
        layer: LayerSelector::Lbp,
        ..PipelineConfig::baseline()
    };
    cfg
}

#[test]
fn eval_labels_are_read_only_after_the_threshold() {
    let exp = Experiment::in_memory(config(10, DomainShiftParams::default(), 2)).unwrap();
    let pipeline = exp.config().pipeline;
    let audit = LabelAudit::default();
    let run = run_single_audited(exp.features(), &pipeline, &exp.splits()[0], 0, exp.options(), &audit).unwrap();
    assert!(audit.threshold_fixed());
    assert!(audit.eval_label_reads() > 0);
    assert_eq!(audit.reads_before_threshold(), 0);

    // scrambling eval labels cannot move anything fitted before evaluation
    let mut scrambled = exp.splits()[0].clone();
    for p in scrambled.eval_pairs.iter_mut() {
        p.label = if p.label == Label::Genuine { Label::Impostor } else { Label::Genuine };
    }
    scrambled.eval_pairs[0].label = Label::Genuine;
    let other = run_single(exp.features(), &pipeline, &scrambled, 0, exp.options()).unwrap();
    assert_eq!(other.dev, run.dev);
    assert_eq!(other.hyper, run.hyper);
    assert_eq!(other.mean_cv_eer, run.mean_cv_eer);
}

#[test]
fn single_runs_are_deterministic() {
    let exp = Experiment::in_memory(config(10, DomainShiftParams::default(), 2)).unwrap();
    let p = exp.config().pipeline;
    let a = run_single(exp.features(), &p, &exp.splits()[1], 1, exp.options()).unwrap();
    let b = run_single(exp.features(), &p, &exp.splits()[1], 1, exp.options()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.split_fingerprint, exp.splits()[1].fingerprint());
}

#[test]
fn easy_data_is_nearly_solved() {
    let exp = Experiment::in_memory(config(20, DomainShiftParams::none(), 5)).unwrap();
    let out = exp.run_config(&exp.config().pipeline).unwrap();
    assert_eq!(out.results.len(), 5);
    assert!(out.failures.is_empty());
    assert!(out.summary.median < 0.25, "median HTER {}", out.summary.median);
}

#[test]
fn always_accept_sits_at_one_half() {
    let exp = Experiment::in_memory(config(10, DomainShiftParams::default(), 6)).unwrap();
    let p = PipelineConfig {
        classifier: ClassifierKind::AlwaysAccept,
        ..exp.config().pipeline
    };
    let out = exp.run_config(&p).unwrap();
    assert_eq!(out.summary.n, 6);
    assert_eq!(out.summary.median, 0.5);
    assert_eq!(out.summary.stddev, 0.0);
    for r in &out.results {
        assert_eq!((r.eval.far, r.eval.frr), (1.0, 0.0));
        assert!(r.hyper.is_none());
    }
}

#[test]
fn every_configuration_sees_the_same_splits() {
    let exp = Experiment::in_memory(config(10, DomainShiftParams::default(), 3)).unwrap();
    let base = exp.config().pipeline;
    let other = PipelineConfig {
        normalization: NormMethod::L2,
        ..base
    };
    let a = exp.run_config(&base).unwrap();
    let b = exp.run_config(&other).unwrap();
    let fa: Vec<&str> = a.results.iter().map(|r| r.split_fingerprint.as_str()).collect();
    let fb: Vec<&str> = b.results.iter().map(|r| r.split_fingerprint.as_str()).collect();
    assert_eq!(fa, fb);
    // a second call reuses stored runs
    assert_eq!(exp.results().len(), 6);
    let again = exp.run_config(&base).unwrap();
    assert_eq!(again.results, a.results);
    assert_eq!(exp.results().len(), 6);
}

#[test]
fn greedy_accounting_with_small_menus() {
    let mut cfg = config(10, DomainShiftParams::default(), 3);
    cfg.menus = StageMenus {
        normalization: vec![NormMethod::None, NormMethod::L2],
        combination: vec![CombineMethod::AbsSub, CombineMethod::Mult],
        classifier: vec![ClassifierKind::LinearSvm, ClassifierKind::AlwaysAccept],
        ..StageMenus::singleton(&cfg.pipeline)
    };
    let exp = Experiment::in_memory(cfg).unwrap();
    let report = exp.greedy().unwrap();
    assert_eq!(report.stages.len(), 5);
    assert_eq!(report.distinct_configs, 4);
    assert_eq!(report.total_runs, 12);
    assert_eq!(report.stages[4].candidates.len(), 2);
    let accept = &report.stages[4].candidates[1];
    assert_eq!(accept.summary.median, 0.5);
    for s in &report.stages {
        let incumbent = s.candidates.iter().find(|c| c.config == s.incumbent).unwrap();
        let winner = s.candidates.iter().find(|c| c.config == s.winner_config()).unwrap();
        assert!(winner.summary.median <= incumbent.summary.median);
        assert_eq!(s.improved, winner.summary.median < incumbent.summary.median);
    }

    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = report
        .stages
        .iter()
        .flat_map(|s| s.candidates.iter().map(|c| c.config))
        .flat_map(|c| exp.run_config(&c).unwrap().results)
        .collect();
    let written = write_reports(dir.path(), &report, &runs).unwrap();
    for name in ["optimization.json", "chosen_pipeline.json", "report.txt", "summary_classifier.csv", "det_baseline.csv"] {
        assert!(written.contains(&dir.path().join(name)), "missing {name}");
    }
    let summary = fs::read_to_string(dir.path().join("summary_classifier.csv")).unwrap();
    assert!(summary.starts_with("Method,Median,Mean±StdDev,Min,Max\n"));
}

#[test]
fn singleton_menus_evaluate_one_pipeline() {
    let mut cfg = config(10, DomainShiftParams::default(), 2);
    cfg.menus = StageMenus::singleton(&cfg.pipeline);
    let exp = Experiment::in_memory(cfg).unwrap();
    let report = exp.greedy().unwrap();
    assert_eq!(report.distinct_configs, 1);
    assert_eq!(report.total_runs, 2);
    assert_eq!(report.chosen, report.baseline);
    assert!(report.stages.iter().all(|s| s.test.is_none() && !s.improved));
}

#[test]
fn interrupted_experiment_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(10, DomainShiftParams::default(), 2);
    cfg.output_dir = dir.path().to_path_buf();
    let first = {
        let exp = Experiment::open(cfg.clone()).unwrap();
        exp.run_config(&cfg.pipeline).unwrap()
    };
    let path = dir.path().join(RESULTS_FILE);
    assert_eq!(read_results(&path).unwrap().len(), 2);

    // more splits later: the first two are reused, not recomputed
    cfg.n_splits = 4;
    let exp = Experiment::open(cfg.clone()).unwrap();
    assert_eq!(exp.results().len(), 2);
    let second = exp.run_config(&cfg.pipeline).unwrap();
    assert_eq!(&second.results[..2], first.results.as_slice());
    assert_eq!(read_results(&path).unwrap().len(), 4);

    // a different protocol never reuses them
    cfg.master_seed += 1;
    let exp = Experiment::open(cfg.clone()).unwrap();
    exp.run_config(&cfg.pipeline).unwrap();
    assert_eq!(read_results(&path).unwrap().len(), 8);
}

#[test]
fn config_files_resolve_relative_paths_and_reject_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    fs::write(
        &path,
        r#"{"dataset": {"manifest": "data/manifest.csv"}, "embeddings": {"builtin": "lbp"}, "n_splits": 7}"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.n_splits, 7);
    assert_eq!(cfg.dataset, DatasetSource::Manifest(dir.path().join("data/manifest.csv")));
    fs::write(&path, r#"{"dataset": {"manifest": "m.csv"}, "embeddings": {"builtin": "lbp"}, "splits": 7}"#).unwrap();
    assert!(ExperimentConfig::load(&path).is_err());
}
