use serde::{Deserialize, Serialize};

use super::quality::knn_accuracy;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::pipeline::{run_fastumap_observed, FastUmapConfig, InitMode};
use crate::sgd::ForceMode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub init: InitMode,
    pub force: ForceMode,
    pub knn_accuracy: f64,
    pub total_s: f64,
}

/// Accuracy of the spectral- and random-initialized hetero runs after a
/// given number of epochs (0 is the starting layout).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub epoch: usize,
    pub spectral_accuracy: f64,
    pub random_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub cells: Vec<AblationCell>,
    pub trace: Vec<TracePoint>,
    pub epochs: usize,
}

impl AblationReport {
    pub fn cell(&self, init: InitMode, force: ForceMode) -> Option<&AblationCell> {
        self.cells.iter().find(|c| c.init == init && c.force == force)
    }
}

/// {spectral, random} x {hetero, homo} with shared seeds, plus an
/// accuracy-versus-epoch trace at the given fractions of the epoch budget.
pub fn ablation_grid(
    x: &DataMatrix,
    labels: &[usize],
    cfg: &FastUmapConfig,
    trace_fractions: &[f64],
) -> Result<AblationReport> {
    if trace_fractions.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
        return Err(Error::Config(format!("trace fractions must lie in [0, 1]: {trace_fractions:?}")));
    }
    let epochs = cfg.optimizer.resolved_epochs(x.nrows());
    let mut trace_epochs: Vec<usize> = trace_fractions.iter().map(|f| (f * epochs as f64).round() as usize).collect();
    trace_epochs.sort_unstable();
    trace_epochs.dedup();

    let mut cells = Vec::new();
    let mut traces: Vec<Vec<f64>> = Vec::new();
    for init in [InitMode::Spectral, InitMode::Random] {
        for force in [ForceMode::Hetero, ForceMode::Homo] {
            let mut run_cfg = cfg.clone();
            run_cfg.init = init;
            run_cfg.kernel.force_mode = force;
            let mut snaps: Vec<Vec<[f64; 2]>> = Vec::new();
            let want_trace = force == ForceMode::Hetero;
            let mut obs = |t: usize, z: &[[f64; 2]]| {
                if want_trace && trace_epochs.binary_search(&t).is_ok() {
                    snaps.push(z.to_vec());
                }
            };
            let out = run_fastumap_observed(x, &run_cfg, Some(&mut obs))?;
            let q = knn_accuracy(&out.embedding.coords, labels, 5, 5, cfg.seed)?;
            log::info!("{init:?}/{force:?}: acc={:.2} total={:.3}s", q.mean_accuracy, out.timings.total_s);
            cells.push(AblationCell { init, force, knn_accuracy: q.mean_accuracy, total_s: out.timings.total_s });
            if want_trace {
                let mut acc = Vec::with_capacity(trace_epochs.len());
                let mut snaps = snaps.into_iter();
                for &t in &trace_epochs {
                    let z = if t == 0 { out.embedding.init.clone() } else { snaps.next().expect("snapshot per epoch") };
                    acc.push(knn_accuracy(&z, labels, 5, 5, cfg.seed)?.mean_accuracy);
                }
                traces.push(acc);
            }
        }
    }
    let trace = trace_epochs
        .iter()
        .enumerate()
        .map(|(i, &epoch)| TracePoint { epoch, spectral_accuracy: traces[0][i], random_accuracy: traces[1][i] })
        .collect();
    Ok(AblationReport { cells, trace, epochs })
}
