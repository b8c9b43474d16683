use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{PipelineConfig, Stage, StageChoice};
use super::experiment::{ConfigOutcome, Experiment};
use super::OrchestratorError;
use crate::evalstats::{stat_test, StatTestReport, Summary};

/// One candidate of a stage, evaluated with every other stage fixed at the
/// incumbent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub choice: StageChoice,
    pub label: String,
    pub config: PipelineConfig,
    pub summary: Summary,
    pub hters: Vec<f64>,
    pub failed_runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    /// Pipeline before this stage was optimized.
    pub incumbent: PipelineConfig,
    pub candidates: Vec<CandidateResult>,
    pub winner: StageChoice,
    /// Whether the winner has a strictly lower median than the incumbent.
    pub improved: bool,
    /// Kruskal–Wallis across candidates, with Dunn's test when significant.
    /// Absent when the stage has a single candidate or the test is undefined.
    pub test: Option<StatTestReport>,
    pub test_note: Option<String>,
}

impl StageReport {
    pub fn winner_config(&self) -> PipelineConfig {
        self.incumbent.with_stage(self.winner)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub protocol: String,
    pub split_list_fingerprint: String,
    pub n_splits: usize,
    pub master_seed: u64,
    pub alpha: f64,
    pub baseline: PipelineConfig,
    pub stages: Vec<StageReport>,
    pub chosen: PipelineConfig,
    /// Distinct pipelines evaluated.
    pub distinct_configs: usize,
    /// Runs attempted over all distinct pipelines.
    pub total_runs: usize,
}

impl Experiment {
    /// Greedy stage-by-stage optimization starting from the configured
    /// pipeline.
    ///
    /// Each stage evaluates every menu candidate (plus the incumbent if the
    /// menu lacks it) with the other stages fixed; a candidate replaces the
    /// incumbent only with a strictly lower median eval HTER, and among
    /// equal medians the earlier menu entry wins. Pipelines already
    /// evaluated are never run again.
    pub fn greedy(&self) -> Result<OptimizationReport, OrchestratorError> {
        let cfg = self.config();
        let mut evaluated: BTreeMap<PipelineConfig, ConfigOutcome> = BTreeMap::new();
        let mut incumbent = cfg.pipeline;
        let mut stages = Vec::with_capacity(Stage::ORDER.len());

        for stage in Stage::ORDER {
            let mut choices = cfg.menus.choices(stage);
            let current = incumbent.stage_value(stage);
            if !choices.contains(&current) {
                choices.push(current);
            }
            let mut candidates = Vec::with_capacity(choices.len());
            for choice in choices {
                let config = incumbent.with_stage(choice);
                if !evaluated.contains_key(&config) {
                    let outcome = self.run_config(&config)?;
                    log::info!(
                        "{stage:?} {config}: median HTER {:.5} over {} runs",
                        outcome.summary.median,
                        outcome.summary.n
                    );
                    evaluated.insert(config, outcome);
                }
                let outcome = &evaluated[&config];
                candidates.push(CandidateResult {
                    choice,
                    label: choice.label(),
                    config,
                    summary: outcome.summary,
                    hters: outcome.hters(),
                    failed_runs: outcome.failures.len(),
                });
            }

            let incumbent_median = candidates
                .iter()
                .find(|c| c.choice == current)
                .map(|c| c.summary.median)
                .expect("incumbent is a candidate");
            let best = candidates
                .iter()
                .fold(None::<&CandidateResult>, |best, c| match best {
                    Some(b) if b.summary.median <= c.summary.median => Some(b),
                    _ => Some(c),
                })
                .expect("stage has candidates");
            let improved = best.summary.median < incumbent_median;
            let winner = if improved { best.choice } else { current };

            let groups: Vec<Vec<f64>> = candidates.iter().map(|c| c.hters.clone()).collect();
            let (test, test_note) = if groups.len() < 2 {
                (None, Some("single candidate".to_string()))
            } else {
                match stat_test(&groups, cfg.alpha) {
                    Ok(t) => (Some(t), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            };

            let report = StageReport {
                stage,
                incumbent,
                candidates,
                winner,
                improved,
                test,
                test_note,
            };
            incumbent = report.winner_config();
            stages.push(report);
        }

        Ok(OptimizationReport {
            protocol: self.options().protocol.clone(),
            split_list_fingerprint: self.split_list_fingerprint().to_string(),
            n_splits: self.splits().len(),
            master_seed: cfg.master_seed,
            alpha: cfg.alpha,
            baseline: cfg.pipeline,
            stages,
            chosen: incumbent,
            distinct_configs: evaluated.len(),
            total_runs: evaluated.values().map(|o| o.results.len() + o.failures.len()).sum(),
        })
    }
}
