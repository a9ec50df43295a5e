//! Run configuration: optional TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use fastumap_core::{
    DataFormat, FastUmapConfig, ForceMode, InitMode, LandmarkBudget, PreprocessConfig,
};
use serde::{Deserialize, Serialize};

/// Default landmark cap for large inputs.
pub const DEFAULT_LANDMARK_CAP: usize = 5000;

/// Raised for invalid or conflicting settings; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Csv,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Spectral,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ForceArg {
    Hetero,
    Homo,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: Option<PathBuf>,
    pub format: Option<FormatArg>,
    pub label_col: Option<String>,
}

impl DatasetSpec {
    pub fn format(&self, path: &Path) -> DataFormat {
        match self.format {
            Some(FormatArg::Csv) => DataFormat::Csv,
            Some(FormatArg::Binary) => DataFormat::BinaryMatrix,
            None => DataFormat::from_path(path),
        }
    }
}

/// Everything a command needs, as stored in the config file and echoed
/// into every meta block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub preprocess: PreprocessConfig,
    pub pipeline: FastUmapConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::default(),
            preprocess: PreprocessConfig::default(),
            pipeline: FastUmapConfig {
                landmarks: LandmarkBudget::Adaptive { cap: Some(DEFAULT_LANDMARK_CAP) },
                ..FastUmapConfig::default()
            },
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Flags shared by every command that runs the pipeline. Each one, when
/// given, overrides the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// TOML config file; flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Input dataset (CSV, or row-major f32 with a JSON sidecar).
    #[arg(long, short)]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Name of the label column in CSV input.
    #[arg(long)]
    pub label_col: Option<String>,

    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Exact landmark count.
    #[arg(long, conflicts_with = "landmark_ratio")]
    pub landmarks: Option<usize>,

    /// Landmarks as a fraction of n, in (0, 1].
    #[arg(long)]
    pub landmark_ratio: Option<f64>,

    /// Upper bound on the adaptive landmark budget; 0 disables the cap.
    #[arg(long, conflicts_with_all = ["landmarks", "landmark_ratio"])]
    pub landmark_cap: Option<usize>,

    /// Neighbouring landmarks per sample.
    #[arg(long, short = 'k')]
    pub n_neighbors: Option<usize>,

    #[arg(long, value_enum)]
    pub init: Option<InitArg>,

    #[arg(long, value_enum)]
    pub force_mode: Option<ForceArg>,

    #[arg(long)]
    pub epochs: Option<usize>,

    #[arg(long)]
    pub min_dist_data: Option<f64>,

    #[arg(long)]
    pub min_dist_landmark: Option<f64>,

    /// Initial SGD learning rate.
    #[arg(long)]
    pub lr: Option<f64>,

    /// Negative samples per positive edge event.
    #[arg(long)]
    pub neg_rate: Option<usize>,

    /// Sequential, bit-reproducible SGD (the default).
    #[arg(long, conflicts_with = "parallel")]
    pub deterministic: bool,

    /// Lock-free parallel SGD; faster, not bit-reproducible.
    #[arg(long)]
    pub parallel: bool,

    /// Eigensolver residual tolerance.
    #[arg(long)]
    pub eig_tol: Option<f64>,

    /// Eigensolver budget of operator applications.
    #[arg(long)]
    pub eig_max_iter: Option<usize>,

    /// PCA target dimension when reduction triggers.
    #[arg(long)]
    pub pca_target: Option<usize>,
}

impl RunArgs {
    /// File values first, then flag overrides.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.input {
            cfg.dataset.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            cfg.dataset.format = Some(f);
        }
        if let Some(l) = &self.label_col {
            cfg.dataset.label_col = Some(l.clone());
        }
        if let Some(o) = &self.out_dir {
            cfg.output_dir = o.clone();
        }
        let p = &mut cfg.pipeline;
        if let Some(s) = self.seed {
            p.seed = s;
            cfg.preprocess.seed = s;
        }
        if let Some(m) = self.landmarks {
            p.landmarks = LandmarkBudget::Count(m);
        }
        if let Some(r) = self.landmark_ratio {
            if !(r > 0.0 && r <= 1.0) {
                return Err(config_err(format!("--landmark-ratio must lie in (0, 1], got {r}")));
            }
            p.landmarks = LandmarkBudget::Ratio(r);
        }
        if let Some(c) = self.landmark_cap {
            p.landmarks = LandmarkBudget::Adaptive { cap: (c > 0).then_some(c) };
        }
        if let Some(k) = self.n_neighbors {
            p.graph.n_neighbors = k;
        }
        if let Some(i) = self.init {
            p.init = match i {
                InitArg::Spectral => InitMode::Spectral,
                InitArg::Random => InitMode::Random,
            };
        }
        if let Some(f) = self.force_mode {
            p.kernel.force_mode = match f {
                ForceArg::Hetero => ForceMode::Hetero,
                ForceArg::Homo => ForceMode::Homo,
            };
        }
        if let Some(e) = self.epochs {
            p.optimizer.epochs = Some(e);
        }
        if let Some(v) = self.min_dist_data {
            p.kernel.min_dist_data = v;
        }
        if let Some(v) = self.min_dist_landmark {
            p.kernel.min_dist_landmark = v;
        }
        if let Some(v) = self.lr {
            p.optimizer.initial_lr = v;
        }
        if let Some(v) = self.neg_rate {
            p.optimizer.negative_rate = v;
        }
        if self.deterministic {
            p.optimizer.deterministic = true;
        }
        if self.parallel {
            p.optimizer.deterministic = false;
        }
        if let Some(v) = self.eig_tol {
            p.spectral.eigensolver.residual_tol = v;
        }
        if let Some(v) = self.eig_max_iter {
            p.spectral.eigensolver.max_iter = v;
        }
        if let Some(t) = self.pca_target {
            cfg.preprocess.pca_target = t;
        }
        Ok(cfg)
    }
}

pub fn load_config_file(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "output_dir = \"from-file\"\n[pipeline]\nseed = 7\n[pipeline.graph]\nn_neighbors = 9\n",
        )
        .unwrap();
        let args = RunArgs { config: Some(path.clone()), seed: Some(11), ..Default::default() };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.pipeline.seed, 11);
        assert_eq!(cfg.pipeline.graph.n_neighbors, 9);
        assert_eq!(cfg.output_dir, PathBuf::from("from-file"));
    }

    #[test]
    fn resolved_config_roundtrips_through_toml() {
        let cfg = RunArgs { landmark_ratio: Some(0.3), ..Default::default() }.resolve().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "sed = 3\n").unwrap();
        let err = load_config_file(&path).unwrap_err();
        assert!(err.downcast_ref::<ConfigError>().is_some());
    }

    #[test]
    fn solver_and_optimizer_flags() {
        let args = RunArgs {
            lr: Some(0.5),
            neg_rate: Some(3),
            parallel: true,
            eig_tol: Some(1e-7),
            eig_max_iter: Some(99),
            ..Default::default()
        };
        let p = args.resolve().unwrap().pipeline;
        assert_eq!((p.optimizer.initial_lr, p.optimizer.negative_rate, p.optimizer.deterministic), (0.5, 3, false));
        assert_eq!((p.spectral.eigensolver.residual_tol, p.spectral.eigensolver.max_iter), (1e-7, 99));
    }

    #[test]
    fn default_cap() {
        let cfg = RunArgs::default().resolve().unwrap();
        assert_eq!(cfg.pipeline.landmarks, LandmarkBudget::Adaptive { cap: Some(5000) });
        let cfg = RunArgs { landmark_cap: Some(0), ..Default::default() }.resolve().unwrap();
        assert_eq!(cfg.pipeline.landmarks, LandmarkBudget::Adaptive { cap: None });
    }
}
