//! End-to-end run: landmarks, bipartite graph, warm start, layout optimization.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_bipartite_graph, build_edge_list, union_edge_list, BipartiteGraph, EdgeMode, GraphConfig};
use crate::landmarks::{default_landmark_budget, sample_landmarks, LandmarkSet};
use crate::matrix::DataMatrix;
use crate::rng::derive_seed;
use crate::sgd::{optimize, EpochObserver, KernelConfig, KernelParams, OptimizerConfig, RoleCounts};
use crate::spectral::{random_init, spectral_init, SpectralBasis, SpectralConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandmarkBudget {
    /// Exactly this many landmarks.
    Count(usize),
    /// round(ratio * n) landmarks.
    Ratio(f64),
    /// Half of n below 500 samples, 70 % above, optionally capped.
    Adaptive { cap: Option<usize> },
}

impl Default for LandmarkBudget {
    fn default() -> Self {
        LandmarkBudget::Adaptive { cap: None }
    }
}

impl LandmarkBudget {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let m = match *self {
            LandmarkBudget::Count(m) => m,
            LandmarkBudget::Ratio(r) => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::Config(format!("landmark ratio must lie in (0, 1], got {r}")));
                }
                ((r * n as f64).round() as usize).max(1)
            }
            LandmarkBudget::Adaptive { cap } => default_landmark_budget(n, cap),
        };
        if m == 0 || m > n {
            return Err(Error::Config(format!("landmark count {m} outside [1, {n}]")));
        }
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    #[default]
    Spectral,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FastUmapConfig {
    pub landmarks: LandmarkBudget,
    pub graph: GraphConfig,
    pub init: InitMode,
    pub spectral: SpectralConfig,
    pub kernel: KernelConfig,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
}

impl Default for FastUmapConfig {
    fn default() -> Self {
        Self {
            landmarks: LandmarkBudget::default(),
            graph: GraphConfig::default(),
            init: InitMode::Spectral,
            spectral: SpectralConfig::default(),
            kernel: KernelConfig::default(),
            optimizer: OptimizerConfig::default(),
            seed: 42,
        }
    }
}

/// Wall-clock seconds per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub epochs: usize,
    pub graph_s: f64,
    pub spectral_s: f64,
    pub sgd_s: f64,
    pub total_s: f64,
}

#[derive(Clone, Debug)]
pub struct Embedding {
    pub coords: Vec<[f64; 2]>,
    pub init: Vec<[f64; 2]>,
    pub epochs: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct FastUmapOutput {
    pub embedding: Embedding,
    pub timings: StageTimings,
    pub landmarks: LandmarkSet,
    pub graph: BipartiteGraph,
    pub kernels: KernelParams,
    pub basis: Option<SpectralBasis>,
    pub role_updates: RoleCounts,
}

impl FastUmapOutput {
    pub fn m(&self) -> usize {
        self.landmarks.m()
    }
}

pub fn run_fastumap(x: &DataMatrix, cfg: &FastUmapConfig) -> Result<FastUmapOutput> {
    run_fastumap_observed(x, cfg, None)
}

/// Same as [`run_fastumap`] with a per-epoch callback on the layout.
pub fn run_fastumap_observed(
    x: &DataMatrix,
    cfg: &FastUmapConfig,
    observer: Option<EpochObserver<'_>>,
) -> Result<FastUmapOutput> {
    let n = x.nrows();
    if n < 3 {
        return Err(Error::InvalidData(format!("need at least 3 samples, got {n}")));
    }
    if !x.is_finite() {
        return Err(Error::InvalidData("feature matrix has non-finite values".into()));
    }
    let kernels = cfg.kernel.resolve()?;
    let m = cfg.landmarks.resolve(n)?;
    if cfg.graph.n_neighbors >= m {
        return Err(Error::Config(format!(
            "n_neighbors ({}) must be smaller than the landmark count ({m})",
            cfg.graph.n_neighbors
        )));
    }

    let start = Instant::now();
    let landmarks = sample_landmarks(n, m, derive_seed(cfg.seed, "landmarks"))?;
    let graph = build_bipartite_graph(x, &landmarks, &cfg.graph)?;
    let edges = match cfg.graph.edge_mode {
        EdgeMode::Duplicate => build_edge_list(&graph, &landmarks),
        EdgeMode::FuzzyUnion => union_edge_list(&graph, &landmarks),
    };
    let graph_s = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let (init, basis) = match cfg.init {
        InitMode::Spectral => {
            let s = spectral_init(&graph, &cfg.spectral, derive_seed(cfg.seed, "spectral"))?;
            (s.layout, Some(s.basis))
        }
        InitMode::Random => (random_init(n, cfg.spectral.radius, derive_seed(cfg.seed, "init")), None),
    };
    let spectral_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let out = optimize(&init, &edges, &kernels, &cfg.optimizer, derive_seed(cfg.seed, "sgd"), observer)?;
    let sgd_s = t.elapsed().as_secs_f64();
    let total_s = start.elapsed().as_secs_f64();
    log::info!(
        "n={n} m={m} k={} edges={} epochs={} graph={graph_s:.3}s spectral={spectral_s:.3}s sgd={sgd_s:.3}s",
        cfg.graph.n_neighbors,
        edges.len(),
        out.epochs
    );

    Ok(FastUmapOutput {
        embedding: Embedding { coords: out.coords, init, epochs: out.epochs, seed: cfg.seed },
        timings: StageTimings {
            n,
            m,
            k: cfg.graph.n_neighbors,
            epochs: out.epochs,
            graph_s,
            spectral_s,
            sgd_s,
            total_s,
        },
        landmarks,
        graph,
        kernels,
        basis,
        role_updates: out.role_updates,
    })
}
