use rand::Rng;

use super::{FeatureMeta, FeatureVector, LayerSelector};
use crate::rng::{derive_seed, seeded, stream};

/// Non-zero weights per output unit.
pub const SURROGATE_FAN_IN: usize = 64;

/// Fixed random sparse layer: each output unit sums `SURROGATE_FAN_IN`
/// inputs with weights ±1/√fan_in.
#[derive(Clone, Debug)]
struct SparseLayer {
    inputs: Vec<u32>,
    signs: Vec<bool>,
    outputs: usize,
}

impl SparseLayer {
    fn random(input_dim: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let n = outputs * SURROGATE_FAN_IN;
        let inputs = (0..n).map(|_| rng.gen_range(0..input_dim as u32)).collect();
        let signs = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        SparseLayer { inputs, signs, outputs }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let scale = 1.0 / (SURROGATE_FAN_IN as f64).sqrt();
        (0..self.outputs)
            .map(|o| {
                let r = o * SURROGATE_FAN_IN..(o + 1) * SURROGATE_FAN_IN;
                let s: f64 = self.inputs[r.clone()]
                    .iter()
                    .zip(&self.signs[r])
                    .map(|(&i, &pos)| if pos { x[i as usize] } else { -x[i as usize] })
                    .sum();
                s * scale
            })
            .collect()
    }
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// Pre-activation outputs of the three surrogate layers.
#[derive(Clone, Debug)]
pub struct SurrogateActivations {
    pub fc6n: Vec<f64>,
    pub fc7n: Vec<f64>,
    pub fc8: Vec<f64>,
}

/// A deterministic random network with the layer widths of the face
/// descriptor network (4096 → 4096 → 2622), stacked on a handcrafted
/// descriptor. It stands in for real activations so that the layer stage
/// (pre- vs. post-ReLU, depth) can be exercised end to end.
///
/// The input is z-scored per vector, then
/// `fc6n = W₁z`, `fc7n = W₂ relu(fc6n)`, `fc8 = W₃ relu(fc7n)`.
#[derive(Clone, Debug)]
pub struct SurrogateNetwork {
    input_dim: usize,
    l6: SparseLayer,
    l7: SparseLayer,
    l8: SparseLayer,
}

impl SurrogateNetwork {
    pub fn new(input_dim: usize, seed: u64) -> Self {
        assert!(input_dim > 0);
        let mut rng = seeded(derive_seed(seed, stream::SURROGATE));
        let l6 = SparseLayer::random(input_dim, 4096, &mut rng);
        let l7 = SparseLayer::random(4096, 4096, &mut rng);
        let l8 = SparseLayer::random(4096, 2622, &mut rng);
        SurrogateNetwork { input_dim, l6, l7, l8 }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn forward(&self, input: &[f64]) -> SurrogateActivations {
        assert_eq!(input.len(), self.input_dim, "surrogate input dimension");
        let n = input.len() as f64;
        let mean = input.iter().sum::<f64>() / n;
        let sd = (input.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        let z: Vec<f64> = if sd > 0.0 {
            input.iter().map(|x| (x - mean) / sd).collect()
        } else {
            vec![0.0; input.len()]
        };
        let fc6n = self.l6.apply(&z);
        let fc7n = self.l7.apply(&relu(&fc6n));
        let fc8 = self.l8.apply(&relu(&fc7n));
        SurrogateActivations { fc6n, fc7n, fc8 }
    }

    /// Pre-activation vector of `layer` (`fc6`/`fc7` return their stored
    /// `fc6n`/`fc7n`; rectification is applied downstream). `None` for the
    /// built-in layers.
    pub fn embed(&self, base: &FeatureVector, layer: LayerSelector) -> Option<FeatureVector> {
        let acts = self.forward(base.values());
        let stored = layer.stored();
        let values = match stored {
            LayerSelector::Fc6n => acts.fc6n,
            LayerSelector::Fc7n => acts.fc7n,
            LayerSelector::Fc8 => acts.fc8,
            _ => return None,
        };
        let meta = FeatureMeta {
            embedder: format!("surrogate/{}", base.meta().embedder),
            layer: stored,
            rectified: false,
            sample: base.meta().sample.clone(),
        };
        Some(FeatureVector::new(values, meta).expect("surrogate activations are finite"))
    }
}
