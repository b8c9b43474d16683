//! # crossface
//!
//! Experiment framework for cross-domain face verification: deciding whether
//! a photographed ID-document portrait and a self-portrait ("selfie") show the
//! same person, without any enrollment gallery.
//!
//! The pipeline has five interchangeable stages:
//!
//! 1. photometric enhancement ([`imaging`]): none, Retinex, ACE or CLAHE,
//!    applied after geometric normalization to a 224×224 eye-aligned crop;
//! 2. feature extraction ([`embedding`]): built-in LBP / DCT descriptors, a
//!    deterministic surrogate for the fc6/fc7/fc8 layer study, or externally
//!    exported activations in the `EMB1` binary format;
//! 3. feature normalization ([`vectorops`]): none, L1, L2 or Z-score;
//! 4. pair combination ([`vectorops`]): absolute difference, element-wise
//!    product, cross-correlation or phase correlation;
//! 5. classification ([`classify`]): linear SVM, RBF SVM or logistic
//!    regression, tuned by grid search with subject-disjoint 3-fold CV.
//!
//! [`evalstats`] provides FAR/FRR/EER/HTER, DET curve data and the
//! Kruskal-Wallis / Dunn / Bonferroni machinery, and [`orchestrator`] drives
//! the 60/20/20 split protocol, the greedy stage-by-stage optimizer, result
//! persistence and reporting.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod classify;
pub mod dataset;
pub mod embedding;
pub mod evalstats;
pub mod imaging;
pub mod orchestrator;
pub mod raster;
pub mod rng;
pub mod vectorops;

pub use dataset::{Domain, FaceSample, Label, SampleKey, SplitPlan};
pub use embedding::{FeatureVector, LayerSelector};
pub use orchestrator::{ExperimentConfig, PipelineConfig};
