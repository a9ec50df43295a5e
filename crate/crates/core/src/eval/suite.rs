use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::quality::knn_accuracy;
use super::timing::timed_run;
use crate::dataset::{load_dataset, preprocess, DataFormat, PreprocessConfig};
use crate::error::{Error, Result};
use crate::pipeline::FastUmapConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    /// Label column for CSV inputs; binary inputs read labels from the sidecar.
    #[serde(default)]
    pub label_col: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteOptions {
    pub config: FastUmapConfig,
    pub preprocess: PreprocessConfig,
    /// Pipeline repetitions per dataset; stage times are medians.
    pub repeats: usize,
    /// Calibration tolerance used for the per-row check.
    pub calibration_tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            config: FastUmapConfig::default(),
            preprocess: PreprocessConfig::default(),
            repeats: 3,
            calibration_tol: 1e-3,
        }
    }
}

/// One results row per dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub r: f64,
    pub k: usize,
    pub epochs: usize,
    pub seed: u64,
    pub knn_acc: f64,
    pub graph_s: f64,
    pub spectral_s: f64,
    pub sgd_s: f64,
    pub total_s: f64,
    pub calibrated_rows: usize,
    pub calibrated_within_tol: usize,
    pub degenerate_rows: usize,
    pub unflagged_off_target: usize,
}

/// Load, preprocess, time and score every available dataset. Missing files
/// are skipped with a warning.
pub fn benchmark_suite(entries: &[DatasetEntry], opts: &SuiteOptions) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(entries.len());
    for entry in entries {
        if !entry.path.exists() {
            log::warn!("skipping {}: {} not found", entry.name, entry.path.display());
            continue;
        }
        let raw = load_dataset(&entry.path, DataFormat::from_path(&entry.path), entry.label_col.as_deref())?;
        let labels = raw
            .labels
            .clone()
            .ok_or_else(|| Error::InvalidData(format!("{} has no labels", entry.name)))?;
        let prepared = preprocess(&raw, &opts.preprocess)?;
        let (out, timings) = timed_run(&prepared.data, &opts.config, opts.repeats)?;
        let q = knn_accuracy(&out.embedding.coords, &labels, 5, 5, opts.config.seed)?;
        let calib = out.graph.calibration_report(opts.calibration_tol);
        let row = BenchRow {
            dataset: entry.name.clone(),
            n: prepared.n(),
            d: prepared.dim(),
            m: out.m(),
            r: (out.m() as f64 / prepared.n() as f64 * 100.0).round() / 100.0,
            k: timings.k,
            epochs: timings.epochs,
            seed: opts.config.seed,
            knn_acc: q.mean_accuracy,
            graph_s: timings.graph_s,
            spectral_s: timings.spectral_s,
            sgd_s: timings.sgd_s,
            total_s: timings.total_s,
            calibrated_rows: calib.rows,
            calibrated_within_tol: calib.within_tol,
            degenerate_rows: calib.degenerate,
            unflagged_off_target: calib.off_target_unflagged,
        };
        log::info!("{}: n={} m={} acc={:.2} total={:.3}s", row.dataset, row.n, row.m, row.knn_acc, row.total_s);
        rows.push(row);
    }
    Ok(rows)
}
