//! Landmark-based UMAP: a sample-to-landmark fuzzy graph, a reduced spectral
//! warm start, and role-aware edge-sampled SGD, plus evaluation tooling.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod landmarks;
pub mod matrix;
pub mod pipeline;
pub mod rng;
pub mod sgd;
pub mod spectral;
pub mod synthetic;

pub use dataset::{load_dataset, preprocess, DataFormat, PreprocessConfig, Prepared, RawDataset};
pub use error::{Error, Result};
pub use graph::{BipartiteGraph, EdgeMode, GraphConfig, HeadRole};
pub use landmarks::{default_landmark_budget, sample_landmarks, LandmarkSet};
pub use matrix::DataMatrix;
pub use pipeline::{
    run_fastumap, run_fastumap_observed, Embedding, FastUmapConfig, FastUmapOutput, InitMode, LandmarkBudget,
    StageTimings,
};
pub use sgd::{ForceMode, KernelConfig, OptimizerConfig};
pub use spectral::SpectralConfig;
