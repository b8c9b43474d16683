use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::OrchestratorError;
use crate::classify::{ClassifierKind, GridDensity};
use crate::dataset::DomainShiftParams;
use crate::embedding::LayerSelector;
use crate::imaging::{AceParams, ClaheParams, EnhancementKind, EnhancementMethod, RetinexParams};
use crate::vectorops::{CombineMethod, NormMethod};

/// One point of the pipeline search space: a technique for each of the
/// five stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub enhancement: EnhancementKind,
    pub layer: LayerSelector,
    pub normalization: NormMethod,
    pub combination: CombineMethod,
    pub classifier: ClassifierKind,
}

impl PipelineConfig {
    /// No enhancement, rectified fc7, no normalization, absolute
    /// difference, linear SVM.
    pub fn baseline() -> Self {
        PipelineConfig {
            enhancement: EnhancementKind::None,
            layer: LayerSelector::Fc7,
            normalization: NormMethod::None,
            combination: CombineMethod::AbsSub,
            classifier: ClassifierKind::LinearSvm,
        }
    }

    /// Canonical identifier, e.g. `none/fc7/none/abssub/linearsvm`.
    pub fn key(&self) -> String {
        format!(
            "{}/{}/{}/{}/{}",
            self.enhancement.tag(),
            self.layer.tag(),
            self.normalization.tag(),
            self.combination.tag(),
            self.classifier.tag()
        )
    }

    pub fn parse_key(key: &str) -> Result<Self, OrchestratorError> {
        let parts: Vec<&str> = key.split('/').collect();
        let bad = |m: String| OrchestratorError::Config(format!("pipeline {key:?}: {m}"));
        if parts.len() != 5 {
            return Err(bad("expected enhancement/layer/normalization/combination/classifier".into()));
        }
        Ok(PipelineConfig {
            enhancement: parts[0].parse().map_err(|e: crate::imaging::ImagingError| bad(e.to_string()))?,
            layer: parts[1].parse().map_err(|e: crate::embedding::EmbeddingError| bad(e.to_string()))?,
            normalization: parts[2].parse().map_err(|e: crate::vectorops::VectorError| bad(e.to_string()))?,
            combination: parts[3].parse().map_err(|e: crate::vectorops::VectorError| bad(e.to_string()))?,
            classifier: parts[4].parse().map_err(bad)?,
        })
    }

    pub fn with_stage(&self, choice: StageChoice) -> Self {
        let mut c = *self;
        match choice {
            StageChoice::Enhancement(v) => c.enhancement = v,
            StageChoice::Layer(v) => c.layer = v,
            StageChoice::Normalization(v) => c.normalization = v,
            StageChoice::Combination(v) => c.combination = v,
            StageChoice::Classifier(v) => c.classifier = v,
        }
        c
    }

    pub fn stage_value(&self, stage: Stage) -> StageChoice {
        match stage {
            Stage::Enhancement => StageChoice::Enhancement(self.enhancement),
            Stage::Layer => StageChoice::Layer(self.layer),
            Stage::Normalization => StageChoice::Normalization(self.normalization),
            Stage::Combination => StageChoice::Combination(self.combination),
            Stage::Classifier => StageChoice::Classifier(self.classifier),
        }
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// The five optimization stages, in greedy order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Enhancement,
    Layer,
    Normalization,
    Combination,
    Classifier,
}

impl Stage {
    pub const ORDER: [Stage; 5] = [
        Stage::Enhancement,
        Stage::Layer,
        Stage::Normalization,
        Stage::Combination,
        Stage::Classifier,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Stage::Enhancement => "enhancement",
            Stage::Layer => "layer",
            Stage::Normalization => "normalization",
            Stage::Combination => "combination",
            Stage::Classifier => "classifier",
        }
    }
}

/// A technique for one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageChoice {
    Enhancement(EnhancementKind),
    Layer(LayerSelector),
    Normalization(NormMethod),
    Combination(CombineMethod),
    Classifier(ClassifierKind),
}

impl StageChoice {
    /// Display name used in report tables.
    pub fn label(&self) -> String {
        match self {
            StageChoice::Enhancement(v) => v.label().to_string(),
            StageChoice::Layer(v) => v.tag().to_string(),
            StageChoice::Normalization(v) => v.label().to_string(),
            StageChoice::Combination(v) => v.label().to_string(),
            StageChoice::Classifier(v) => v.label().to_string(),
        }
    }
}

/// Candidate techniques per stage. Defaults are the full menus: four
/// enhancements, five network layers, four normalizations, four
/// combinations and three classifiers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageMenus {
    pub enhancement: Vec<EnhancementKind>,
    pub layer: Vec<LayerSelector>,
    pub normalization: Vec<NormMethod>,
    pub combination: Vec<CombineMethod>,
    pub classifier: Vec<ClassifierKind>,
}

impl Default for StageMenus {
    fn default() -> Self {
        StageMenus {
            enhancement: EnhancementKind::ALL.to_vec(),
            layer: LayerSelector::NETWORK.to_vec(),
            normalization: NormMethod::ALL.to_vec(),
            combination: CombineMethod::ALL.to_vec(),
            classifier: ClassifierKind::TRAINABLE.to_vec(),
        }
    }
}

impl StageMenus {
    pub fn choices(&self, stage: Stage) -> Vec<StageChoice> {
        match stage {
            Stage::Enhancement => self.enhancement.iter().map(|&v| StageChoice::Enhancement(v)).collect(),
            Stage::Layer => self.layer.iter().map(|&v| StageChoice::Layer(v)).collect(),
            Stage::Normalization => self.normalization.iter().map(|&v| StageChoice::Normalization(v)).collect(),
            Stage::Combination => self.combination.iter().map(|&v| StageChoice::Combination(v)).collect(),
            Stage::Classifier => self.classifier.iter().map(|&v| StageChoice::Classifier(v)).collect(),
        }
    }

    /// Menus with a single entry per stage, taken from `config`.
    pub fn singleton(config: &PipelineConfig) -> Self {
        StageMenus {
            enhancement: vec![config.enhancement],
            layer: vec![config.layer],
            normalization: vec![config.normalization],
            combination: vec![config.combination],
            classifier: vec![config.classifier],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    /// Manifest CSV; relative paths resolve against the config file.
    Manifest(PathBuf),
    Synthetic {
        n_subjects: usize,
        seed: u64,
        #[serde(default)]
        shift: DomainShiftParams,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinEmbedder {
    Lbp,
    Dct,
}

impl BuiltinEmbedder {
    pub fn layer(self) -> LayerSelector {
        match self {
            BuiltinEmbedder::Lbp => LayerSelector::Lbp,
            BuiltinEmbedder::Dct => LayerSelector::Dct,
        }
    }
}

/// Where feature vectors come from.
///
/// With `builtin`, the layers `lbp` and `dct` are the descriptors
/// themselves and the network layers are produced by the surrogate network
/// stacked on the chosen descriptor. With `external`, keys are stored
/// layer tags (`fc6n`, `fc7n`, `fc8`, …), optionally prefixed by an
/// enhancement tag (`ace:fc7n`) for exports computed on enhanced crops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSource {
    Builtin(BuiltinEmbedder),
    External(BTreeMap<String, PathBuf>),
}

/// Parameters of the three enhancement methods.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnhancementParams {
    pub retinex: RetinexParams,
    pub ace: AceParams,
    pub clahe: ClaheParams,
}

impl EnhancementParams {
    pub fn method(&self, kind: EnhancementKind) -> EnhancementMethod {
        match kind {
            EnhancementKind::None => EnhancementMethod::None,
            EnhancementKind::Retinex => EnhancementMethod::Retinex(self.retinex.clone()),
            EnhancementKind::Ace => EnhancementMethod::Ace(self.ace.clone()),
            EnhancementKind::Clahe => EnhancementMethod::Clahe(self.clahe.clone()),
        }
    }
}

fn default_baseline() -> PipelineConfig {
    PipelineConfig::baseline()
}

fn default_splits() -> usize {
    100
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_jobs() -> usize {
    1
}

fn default_alpha() -> f64 {
    0.05
}

fn default_true() -> bool {
    true
}

/// Experiment configuration file (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub embeddings: EmbeddingSource,
    #[serde(default)]
    pub menus: StageMenus,
    /// Starting point of the greedy search and the pipeline of `run`.
    #[serde(default = "default_baseline")]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub grid: GridDensity,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_splits")]
    pub n_splits: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub enhancement_params: EnhancementParams,
    /// Use the conjugated, per-bin normalized phase correlation.
    #[serde(default)]
    pub classical_phase_correlation: bool,
    /// Seed of the surrogate network weights (built-in embeddings only).
    #[serde(default)]
    pub surrogate_seed: u64,
    /// Significance level that triggers the post hoc test.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Keep eval score lists in `results.jsonl` (needed for DET export).
    #[serde(default = "default_true")]
    pub retain_scores: bool,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSource, embeddings: EmbeddingSource) -> Self {
        ExperimentConfig {
            dataset,
            embeddings,
            menus: StageMenus::default(),
            pipeline: PipelineConfig::baseline(),
            grid: GridDensity::Coarse,
            master_seed: 0,
            n_splits: default_splits(),
            output_dir: default_output(),
            jobs: 1,
            enhancement_params: EnhancementParams::default(),
            classical_phase_correlation: false,
            surrogate_seed: 0,
            alpha: default_alpha(),
            retain_scores: true,
        }
    }

    /// Reads a config file; relative dataset and embedding paths are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, OrchestratorError> {
        let text = fs::read_to_string(path).map_err(|e| OrchestratorError::io(path, e))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| OrchestratorError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DatasetSource::Manifest(p) = &mut cfg.dataset {
            resolve(p);
        }
        if let EmbeddingSource::External(map) = &mut cfg.embeddings {
            map.values_mut().for_each(resolve);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        if self.n_splits == 0 {
            return bad("n_splits must be at least 1".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        for kind in EnhancementKind::ALL {
            self.enhancement_params
                .method(kind)
                .validate()
                .map_err(|e| OrchestratorError::Config(e.to_string()))?;
        }
        let menus = &self.menus;
        if menus.enhancement.is_empty()
            || menus.layer.is_empty()
            || menus.normalization.is_empty()
            || menus.combination.is_empty()
            || menus.classifier.is_empty()
        {
            return bad("every stage menu needs at least one entry".into());
        }
        let mut layers: Vec<LayerSelector> = menus.layer.clone();
        layers.push(self.pipeline.layer);
        let mut enhancements: Vec<EnhancementKind> = menus.enhancement.clone();
        enhancements.push(self.pipeline.enhancement);
        match &self.embeddings {
            EmbeddingSource::Builtin(b) => {
                for l in &layers {
                    if !l.is_network_layer() && *l != b.layer() {
                        return bad(format!("layer {l} is not available with the built-in {} embedder", b.layer()));
                    }
                }
            }
            EmbeddingSource::External(map) => {
                for key in map.keys() {
                    parse_external_key(key)?;
                }
                for l in &layers {
                    for e in &enhancements {
                        if external_path(map, *e, *l).is_none() {
                            return bad(format!(
                                "no external embedding file for layer {l} (stored as {}) with enhancement {e}",
                                l.stored()
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Stable digest of every setting that affects run results (menus,
    /// split count, output location and worker count excluded).
    pub fn protocol_fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct Protocol<'a> {
            dataset: &'a DatasetSource,
            embeddings: &'a EmbeddingSource,
            grid: GridDensity,
            master_seed: u64,
            enhancement_params: &'a EnhancementParams,
            classical_phase_correlation: bool,
            surrogate_seed: u64,
        }
        let p = Protocol {
            dataset: &self.dataset,
            embeddings: &self.embeddings,
            grid: self.grid,
            master_seed: self.master_seed,
            enhancement_params: &self.enhancement_params,
            classical_phase_correlation: self.classical_phase_correlation,
            surrogate_seed: self.surrogate_seed,
        };
        let json = serde_json::to_vec(&p).expect("protocol serializes");
        crate::dataset::hex_digest(&json)[..16].to_string()
    }
}

/// Splits an external-map key into an optional enhancement and a stored
/// layer.
pub fn parse_external_key(key: &str) -> Result<(Option<EnhancementKind>, LayerSelector), OrchestratorError> {
    let bad = |m: String| OrchestratorError::Config(format!("external embedding key {key:?}: {m}"));
    let (enh, layer) = match key.split_once(':') {
        Some((e, l)) => (Some(e.parse::<EnhancementKind>().map_err(|e| bad(e.to_string()))?), l),
        None => (None, key),
    };
    let layer: LayerSelector = layer.parse().map_err(|e: crate::embedding::EmbeddingError| bad(e.to_string()))?;
    if layer.stored() != layer {
        return Err(bad(format!("files store pre-activation layers; use {}", layer.stored())));
    }
    Ok((enh, layer))
}

/// File holding `layer` for faces with `enhancement`: an
/// enhancement-specific entry wins over a plain layer entry.
pub fn external_path(map: &BTreeMap<String, PathBuf>, enhancement: EnhancementKind, layer: LayerSelector) -> Option<&PathBuf> {
    let stored = layer.stored();
    map.get(&format!("{}:{}", enhancement.tag(), stored.tag()))
        .or_else(|| map.get(stored.tag()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipeline_keys_round_trip() {
        let b = PipelineConfig::baseline();
        assert_eq!(b.key(), "none/fc7/none/abssub/linearsvm");
        assert_eq!(PipelineConfig::parse_key(&b.key()).unwrap(), b);
        assert!(PipelineConfig::parse_key("none/fc7/none").is_err());
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"dataset": {"synthetic": {"n_subjects": 20, "seed": 3}}, "embeddings": {"builtin": "lbp"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_splits, 100);
        assert_eq!(cfg.pipeline, PipelineConfig::baseline());
        assert_eq!(cfg.menus.layer.len(), 5);
        assert_eq!(cfg.grid, GridDensity::Coarse);
        cfg.validate().unwrap();
    }

    #[test]
    fn external_layers_must_be_covered() {
        let mut map = BTreeMap::new();
        map.insert("fc7n".to_string(), PathBuf::from("fc7n.emb"));
        let mut cfg = ExperimentConfig::new(
            DatasetSource::Manifest("m.csv".into()),
            EmbeddingSource::External(map.clone()),
        );
        cfg.menus = StageMenus::singleton(&cfg.pipeline);
        cfg.validate().unwrap();
        cfg.menus.layer.push(LayerSelector::Fc8);
        assert!(cfg.validate().is_err());

        map.insert("ace:fc7n".into(), PathBuf::from("ace_fc7n.emb"));
        assert_eq!(external_path(&map, EnhancementKind::Ace, LayerSelector::Fc7).unwrap(), &PathBuf::from("ace_fc7n.emb"));
        assert_eq!(external_path(&map, EnhancementKind::Clahe, LayerSelector::Fc7n).unwrap(), &PathBuf::from("fc7n.emb"));
        assert!(parse_external_key("fc7").is_err());
    }

    #[test]
    fn builtin_rejects_foreign_descriptor() {
        let mut cfg = ExperimentConfig::new(
            DatasetSource::Synthetic {
                n_subjects: 10,
                seed: 1,
                shift: DomainShiftParams::default(),
            },
            EmbeddingSource::Builtin(BuiltinEmbedder::Lbp),
        );
        cfg.pipeline.layer = LayerSelector::Dct;
        assert!(cfg.validate().is_err());
    }
}
