use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn crossface(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_crossface"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "crossface {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_run_greedy_report_det() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data");
    crossface(&["synth", "--subjects", "10", "--seed", "4", "--out", p(&data)]);
    assert!(data.join("manifest.csv").exists());

    let ingest = crossface(&["ingest", p(&data.join("manifest.csv"))]);
    assert!(String::from_utf8_lossy(&ingest.stdout).contains("20 samples, 10 subjects"));

    let config = root.path().join("exp.json");
    fs::write(
        &config,
        r#"{
  "dataset": {"manifest": "data/manifest.csv"},
  "embeddings": {"builtin": "lbp"},
  "pipeline": {"enhancement": "none", "layer": "lbp", "normalization": "none", "combination": "abssub", "classifier": "linearsvm"},
  "menus": {"enhancement": ["none"], "layer": ["lbp"], "normalization": ["none"], "combination": ["abssub"], "classifier": ["linearsvm", "accept"]}
}"#,
    )
    .unwrap();

    let emb = root.path().join("emb");
    crossface(&["embed", "--config", p(&config), "--layers", "lbp,fc7n", "--out", p(&emb)]);
    assert!(emb.join("none_lbp.emb1").exists() && emb.join("none_fc7n.emb1").exists());

    let run_dir = root.path().join("run");
    crossface(&["run", "--config", p(&config), "--splits", "2", "--seed", "1", "--jobs", "1", "--out", p(&run_dir)]);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(run_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"]["n"], 2);

    let det = crossface(&["det", "--out", p(&run_dir), "--pipeline", "none/lbp/none/abssub/linearsvm"]);
    assert!(String::from_utf8_lossy(&det.stdout).contains("eval HTER"));
    let csv = fs::read_to_string(run_dir.join("det_none_lbp_none_abssub_linearsvm.csv")).unwrap();
    assert!(csv.starts_with("tau,far,frr,probit_far,probit_frr"));

    let greedy_dir = root.path().join("greedy");
    let greedy = crossface(&[
        "greedy", "--config", p(&config), "--splits", "2", "--grid", "coarse", "--out", p(&greedy_dir),
    ]);
    let text = String::from_utf8_lossy(&greedy.stdout).to_string();
    assert!(text.contains("2 distinct pipelines, 4 runs"), "{text}");
    for name in ["optimization.json", "chosen_pipeline.json", "report.txt", "summary_classifier.csv"] {
        assert!(greedy_dir.join(name).exists(), "missing {name}");
    }
    fs::remove_file(greedy_dir.join("report.txt")).unwrap();
    crossface(&["report", "--out", p(&greedy_dir)]);
    assert_eq!(fs::read_to_string(greedy_dir.join("report.txt")).unwrap(), text);
}

#[test]
fn bad_input_fails_cleanly() {
    let root = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_crossface"))
        .args(["ingest", p(&root.path().join("missing.csv"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
