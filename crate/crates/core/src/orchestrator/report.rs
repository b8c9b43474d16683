use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::Rng;

use super::config::PipelineConfig;
use super::greedy::{OptimizationReport, StageReport};
use super::pipeline::RunResult;
use super::OrchestratorError;
use crate::evalstats::{det_points, write_det_csv, PairScoreSet};
use crate::rng::{derive_seed, seeded, splitmix64, stream};

pub const SUMMARY_COLUMNS: [&str; 5] = ["Method", "Median", "Mean±StdDev", "Min", "Max"];

fn f5(x: f64) -> String {
    format!("{x:.5}")
}

/// Per-candidate HTER statistics of a stage: a header row followed by one
/// row per candidate, values to 5 decimals.
pub fn summary_table(stage: &StageReport) -> Vec<Vec<String>> {
    let mut rows = vec![SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect()];
    for c in &stage.candidates {
        let s = &c.summary;
        rows.push(vec![
            c.label.clone(),
            f5(s.median),
            format!("{}±{}", f5(s.mean), f5(s.stddev)),
            f5(s.min),
            f5(s.max),
        ]);
    }
    rows
}

/// Lower-triangular Dunn matrix of a stage: the header row names the first
/// k−1 candidates, row i (i ≥ 1) holds the adjusted p-values against
/// candidates 0..i. `None` when the post hoc test was not run.
pub fn dunn_table(stage: &StageReport) -> Option<Vec<Vec<String>>> {
    let dunn = stage.test.as_ref()?.pairwise.as_ref()?;
    let labels: Vec<&str> = stage.candidates.iter().map(|c| c.label.as_str()).collect();
    let k = labels.len();
    let mut rows = Vec::with_capacity(k);
    let mut header = vec![String::new()];
    header.extend(labels[..k - 1].iter().map(|s| s.to_string()));
    rows.push(header);
    for i in 1..k {
        let mut row = vec![labels[i].to_string()];
        row.extend((0..i).map(|j| dunn.get(i, j).map(f5).unwrap_or_default()));
        rows.push(row);
    }
    Some(rows)
}

fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s}{}", " ".repeat(widths[c] - s.chars().count())))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn write_csv(path: &Path, rows: &[Vec<String>]) -> Result<(), OrchestratorError> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| OrchestratorError::io(path, e.into()))?;
    for r in rows {
        w.write_record(r).map_err(|e| OrchestratorError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| OrchestratorError::io(path, e))
}

/// Plain-text rendering of every stage table, test and the chosen pipeline.
pub fn render_report(report: &OptimizationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Greedy optimization over {} splits (split list {}, master seed {})",
        report.n_splits,
        &report.split_list_fingerprint[..16.min(report.split_list_fingerprint.len())],
        report.master_seed
    );
    let _ = writeln!(out, "Baseline: {}", report.baseline);
    for (i, stage) in report.stages.iter().enumerate() {
        let _ = writeln!(out, "\nStage {}: {} (incumbent {})", i + 1, stage.stage.tag(), stage.incumbent);
        out.push_str(&aligned(&summary_table(stage)));
        match (&stage.test, &stage.test_note) {
            (Some(t), _) => {
                let _ = writeln!(out, "Kruskal-Wallis H = {:.5}, p = {:.5}", t.h_statistic, t.kw_pvalue);
                match dunn_table(stage) {
                    Some(rows) => {
                        let _ = writeln!(out, "Dunn post hoc, Bonferroni-adjusted p-values:");
                        out.push_str(&aligned(&rows));
                    }
                    None => {
                        let _ = writeln!(out, "p > {}: no post hoc test", report.alpha);
                    }
                }
            }
            (None, Some(note)) => {
                let _ = writeln!(out, "No omnibus test: {note}");
            }
            (None, None) => {}
        }
        let _ = writeln!(
            out,
            "Selected: {}{}",
            stage.winner.label(),
            if stage.improved { "" } else { " (incumbent kept)" }
        );
    }
    let _ = writeln!(out, "\nChosen pipeline: {}", report.chosen);
    let _ = writeln!(
        out,
        "{} distinct pipelines, {} runs",
        report.distinct_configs, report.total_runs
    );
    out
}

fn key_hash(key: &str) -> u64 {
    key.bytes().fold(0u64, |h, b| splitmix64(h ^ b as u64))
}

/// A run whose eval HTER is a median of `config`'s runs, picked with a
/// seed derived from `master_seed` and the pipeline key.
///
/// With an odd count the candidates are the runs tied at the middle value;
/// with an even count, the runs at either of the two middle values.
pub fn median_run<'a>(runs: &'a [RunResult], config: &PipelineConfig, master_seed: u64) -> Option<&'a RunResult> {
    let mut own: Vec<&RunResult> = runs.iter().filter(|r| r.config == *config).collect();
    if own.is_empty() {
        return None;
    }
    own.sort_by(|a, b| a.eval_hter().total_cmp(&b.eval_hter()).then(a.split_index.cmp(&b.split_index)));
    let n = own.len();
    let middle = if n % 2 == 1 {
        vec![own[n / 2].eval_hter()]
    } else {
        vec![own[n / 2 - 1].eval_hter(), own[n / 2].eval_hter()]
    };
    let mut tied: Vec<&RunResult> = own.into_iter().filter(|r| middle.contains(&r.eval_hter())).collect();
    tied.sort_by_key(|r| r.split_index);
    let seed = derive_seed(derive_seed(master_seed, stream::MEDIAN_PICK), key_hash(&config.key()));
    let pick = seeded(seed).gen_range(0..tied.len());
    Some(tied[pick])
}

/// DET CSV of one run's retained eval scores.
pub fn write_det_for_run(path: &Path, run: &RunResult) -> Result<(), OrchestratorError> {
    let scores = run.scores.as_ref().ok_or_else(|| {
        OrchestratorError::NoResults(format!(
            "{} split {}: eval scores were not retained",
            run.config, run.split_index
        ))
    })?;
    let set = PairScoreSet::from_parts(&scores.genuine, &scores.impostor)?;
    let file = File::create(path).map_err(|e| OrchestratorError::io(path, e))?;
    write_det_csv(&mut BufWriter::new(file), &det_points(&set)).map_err(|e| OrchestratorError::io(path, e))
}

/// Writes `optimization.json`, `chosen_pipeline.json`, `report.txt`,
/// `summary_<stage>.csv`, `dunn_<stage>.csv` (stages with a post hoc
/// test), `det_baseline.csv` and `det_<stage>.csv` for every stage that
/// improved on its incumbent. `runs` must hold the retained-score runs of
/// the baseline and the stage winners. Returns the written paths.
pub fn write_reports(
    dir: &Path,
    report: &OptimizationReport,
    runs: &[RunResult],
) -> Result<Vec<PathBuf>, OrchestratorError> {
    fs::create_dir_all(dir).map_err(|e| OrchestratorError::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<(), OrchestratorError> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| OrchestratorError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    put(
        "optimization.json".into(),
        serde_json::to_string_pretty(report).expect("report serializes") + "\n",
    )?;
    put(
        "chosen_pipeline.json".into(),
        serde_json::to_string_pretty(&report.chosen).expect("pipeline serializes") + "\n",
    )?;
    put("report.txt".into(), render_report(report))?;

    for stage in &report.stages {
        let path = dir.join(format!("summary_{}.csv", stage.stage.tag()));
        write_csv(&path, &summary_table(stage))?;
        written.push(path);
        if let Some(rows) = dunn_table(stage) {
            let path = dir.join(format!("dunn_{}.csv", stage.stage.tag()));
            write_csv(&path, &rows)?;
            written.push(path);
        }
    }

    let runs: Vec<RunResult> = runs
        .iter()
        .filter(|r| r.protocol == report.protocol && r.split_index < report.n_splits)
        .cloned()
        .collect();
    let mut dets = vec![("baseline".to_string(), report.baseline)];
    dets.extend(
        report
            .stages
            .iter()
            .filter(|s| s.improved)
            .map(|s| (s.stage.tag().to_string(), s.winner_config())),
    );
    for (name, config) in dets {
        match median_run(&runs, &config, report.master_seed) {
            Some(run) if run.scores.is_some() => {
                let path = dir.join(format!("det_{name}.csv"));
                write_det_for_run(&path, run)?;
                written.push(path);
            }
            Some(_) => log::warn!("{config}: eval scores not retained; skipping det_{name}.csv"),
            None => log::warn!("{config}: no stored runs; skipping det_{name}.csv"),
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalstats::ThresholdReport;

    fn run(split_index: usize, hter: f64) -> RunResult {
        let r = ThresholdReport {
            tau: 0.0,
            far: hter,
            frr: hter,
            hter,
        };
        RunResult {
            config: PipelineConfig::baseline(),
            split_index,
            split_fingerprint: String::new(),
            protocol: String::new(),
            dev: r,
            eval: r,
            hyper: None,
            mean_cv_eer: None,
            converged: true,
            scores: None,
        }
    }

    #[test]
    fn unique_odd_median_ignores_seed() {
        let runs: Vec<RunResult> = [0.3, 0.1, 0.2, 0.5, 0.4].iter().enumerate().map(|(i, &h)| run(i, h)).collect();
        for seed in 0..20 {
            let m = median_run(&runs, &PipelineConfig::baseline(), seed).unwrap();
            assert_eq!(m.split_index, 0);
        }
    }

    #[test]
    fn even_count_picks_one_of_the_middle_pair() {
        let runs: Vec<RunResult> = [0.1, 0.2, 0.3, 0.4].iter().enumerate().map(|(i, &h)| run(i, h)).collect();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..50 {
            let m = median_run(&runs, &PipelineConfig::baseline(), seed).unwrap();
            assert!(m.split_index == 1 || m.split_index == 2);
            assert_eq!(median_run(&runs, &PipelineConfig::baseline(), seed).unwrap().split_index, m.split_index);
            seen.insert(m.split_index);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn aligned_columns() {
        let rows = vec![
            vec!["Method".to_string(), "Median".to_string()],
            vec!["CLAHE".to_string(), "0.06111".to_string()],
        ];
        assert_eq!(aligned(&rows), "Method  Median\nCLAHE   0.06111\n");
    }
}
