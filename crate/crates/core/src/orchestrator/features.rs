use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::config::{external_path, EmbeddingSource, EnhancementParams};
use super::pipeline::RunStage;
use super::RunError;
use crate::dataset::{FaceSample, SampleKey};
use crate::embedding::{embed_dct, embed_lbp, load_external, rectify, FeatureVector, LayerSelector, SurrogateNetwork};
use crate::imaging::{enhance, normalize_geometry, AlignedFace, EnhancementKind};
use crate::vectorops::{normalize_values, NormMethod};

type PerSample<T> = Arc<Vec<Result<T, RunError>>>;

/// Feature vectors of every sample for one (enhancement, layer,
/// normalization) triple. Samples whose extraction failed carry the
/// stage-tagged error, which surfaces in every run that needs them.
#[derive(Debug)]
pub struct FeatureTable {
    pub enhancement: EnhancementKind,
    pub layer: LayerSelector,
    pub normalization: NormMethod,
    index: Arc<BTreeMap<SampleKey, usize>>,
    rows: Vec<Result<Vec<f64>, RunError>>,
}

impl FeatureTable {
    pub fn get(&self, key: &SampleKey) -> Result<&[f64], RunError> {
        let i = *self
            .index
            .get(key)
            .ok_or_else(|| RunError::new(RunStage::Embed, format!("no sample {key}")))?;
        match &self.rows[i] {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Successfully extracted vectors, in sample order.
    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().filter_map(|r| r.as_ref().ok().map(Vec::as_slice))
    }
}

/// Lazily computed, memoized features of a dataset.
///
/// Geometric normalization runs once; each enhancement, base descriptor,
/// stored layer and normalized table is computed the first time it is
/// requested and shared afterwards. Per-sample work runs on the current
/// rayon pool.
pub struct FeatureStore {
    samples: Vec<FaceSample>,
    index: Arc<BTreeMap<SampleKey, usize>>,
    embeddings: EmbeddingSource,
    params: EnhancementParams,
    surrogate_seed: u64,
    aligned: OnceLock<PerSample<AlignedFace>>,
    surrogate: OnceLock<SurrogateNetwork>,
    enhanced: Mutex<HashMap<EnhancementKind, PerSample<AlignedFace>>>,
    base: Mutex<HashMap<EnhancementKind, PerSample<FeatureVector>>>,
    stored: Mutex<HashMap<(EnhancementKind, LayerSelector), PerSample<FeatureVector>>>,
    tables: Mutex<HashMap<(EnhancementKind, LayerSelector, NormMethod), Arc<FeatureTable>>>,
}

fn memo<K: std::hash::Hash + Eq + Copy, V: Clone>(
    cache: &Mutex<HashMap<K, V>>,
    key: K,
    compute: impl FnOnce() -> Result<V, RunError>,
) -> Result<V, RunError> {
    if let Some(v) = cache.lock().expect("feature cache poisoned").get(&key) {
        return Ok(v.clone());
    }
    let v = compute()?;
    Ok(cache
        .lock()
        .expect("feature cache poisoned")
        .entry(key)
        .or_insert(v)
        .clone())
}

impl FeatureStore {
    pub fn new(
        samples: Vec<FaceSample>,
        embeddings: EmbeddingSource,
        params: EnhancementParams,
        surrogate_seed: u64,
    ) -> Self {
        let index: BTreeMap<SampleKey, usize> = samples.iter().enumerate().map(|(i, s)| (s.key(), i)).collect();
        FeatureStore {
            samples,
            index: Arc::new(index),
            embeddings,
            params,
            surrogate_seed,
            aligned: OnceLock::new(),
            surrogate: OnceLock::new(),
            enhanced: Mutex::new(HashMap::new()),
            base: Mutex::new(HashMap::new()),
            stored: Mutex::new(HashMap::new()),
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn samples(&self) -> &[FaceSample] {
        &self.samples
    }

    fn aligned(&self) -> PerSample<AlignedFace> {
        self.aligned
            .get_or_init(|| {
                Arc::new(
                    self.samples
                        .par_iter()
                        .map(|s| normalize_geometry(s).map_err(|e| RunError::new(RunStage::Enhance, e)))
                        .collect(),
                )
            })
            .clone()
    }

    /// Aligned faces after `kind` (`None` gives the plain aligned faces).
    pub fn enhanced(&self, kind: EnhancementKind) -> PerSample<AlignedFace> {
        memo(&self.enhanced, kind, || {
            let aligned = self.aligned();
            if kind == EnhancementKind::None {
                return Ok(aligned);
            }
            let method = self.params.method(kind);
            Ok(Arc::new(
                aligned
                    .par_iter()
                    .map(|face| face.as_ref().map(|f| enhance(f, &method)).map_err(Clone::clone))
                    .collect(),
            ))
        })
        .expect("enhancement is infallible once aligned")
    }

    fn base(&self, kind: EnhancementKind, embedder: LayerSelector) -> PerSample<FeatureVector> {
        memo(&self.base, kind, || {
            let faces = self.enhanced(kind);
            let describe = match embedder {
                LayerSelector::Dct => embed_dct,
                _ => embed_lbp,
            };
            Ok(Arc::new(
                faces
                    .par_iter()
                    .map(|f| f.as_ref().map(describe).map_err(Clone::clone))
                    .collect(),
            ))
        })
        .expect("base descriptors are infallible once aligned")
    }

    /// Pre-activation (stored) vectors of `layer` for faces enhanced with
    /// `kind`.
    fn stored(&self, kind: EnhancementKind, layer: LayerSelector) -> Result<PerSample<FeatureVector>, RunError> {
        let layer = layer.stored();
        memo(&self.stored, (kind, layer), || match &self.embeddings {
            EmbeddingSource::Builtin(b) => {
                let base = self.base(kind, b.layer());
                if !layer.is_network_layer() {
                    if layer != b.layer() {
                        return Err(RunError::new(
                            RunStage::Embed,
                            format!("layer {layer} unavailable with built-in {} embeddings", b.layer()),
                        ));
                    }
                    return Ok(base);
                }
                let dim = b.layer().expected_dim();
                let net = self.surrogate.get_or_init(|| SurrogateNetwork::new(dim, self.surrogate_seed));
                Ok(Arc::new(
                    base.par_iter()
                        .map(|v| {
                            let v = v.as_ref().map_err(Clone::clone)?;
                            net.embed(v, layer)
                                .ok_or_else(|| RunError::new(RunStage::Embed, format!("surrogate has no layer {layer}")))
                        })
                        .collect(),
                ))
            }
            EmbeddingSource::External(map) => {
                let path = external_path(map, kind, layer).ok_or_else(|| {
                    RunError::new(
                        RunStage::Embed,
                        format!("no embedding file for layer {layer} with enhancement {kind}"),
                    )
                })?;
                let mut loaded = load_external(path, layer).map_err(|e| RunError::new(RunStage::Embed, e))?;
                let dims: std::collections::BTreeSet<usize> = loaded.values().map(FeatureVector::dim).collect();
                if dims.len() > 1 {
                    return Err(RunError::new(
                        RunStage::Embed,
                        format!("{}: inconsistent dimensions {dims:?}", path.display()),
                    ));
                }
                Ok(Arc::new(
                    self.samples
                        .iter()
                        .map(|s| {
                            let key = s.key();
                            loaded.remove(&key).ok_or_else(|| {
                                RunError::new(RunStage::Embed, format!("{}: no vector for {key}", path.display()))
                            })
                        })
                        .collect(),
                ))
            }
        })
    }

    /// Feature table for one (enhancement, layer, normalization) triple;
    /// `fc6`/`fc7` are rectified before normalization.
    pub fn table(
        &self,
        kind: EnhancementKind,
        layer: LayerSelector,
        norm: NormMethod,
    ) -> Result<Arc<FeatureTable>, RunError> {
        memo(&self.tables, (kind, layer, norm), || {
            let stored = self.stored(kind, layer)?;
            let rows = stored
                .par_iter()
                .map(|v| {
                    let v = v.as_ref().map_err(Clone::clone)?;
                    let v = if layer.rectified() { rectify(v) } else { v.clone() };
                    normalize_values(v.values(), norm)
                        .map_err(|e| RunError::new(RunStage::Normalize, format!("{}: {e}", v.meta().sample)))
                })
                .collect();
            Ok(Arc::new(FeatureTable {
                enhancement: kind,
                layer,
                normalization: norm,
                index: self.index.clone(),
                rows,
            }))
        })
    }

    /// Layer feature vectors before normalization (rectified for
    /// `fc6`/`fc7`), for inspection and sparsity measurements.
    pub fn layer_vectors(&self, kind: EnhancementKind, layer: LayerSelector) -> Result<Vec<FeatureVector>, RunError> {
        self.stored(kind, layer)?
            .iter()
            .map(|v| {
                let v = v.as_ref().map_err(Clone::clone)?;
                Ok(if layer.rectified() { rectify(v) } else { v.clone() })
            })
            .collect()
    }
}
