use serde::{Deserialize, Serialize};

use super::quality::knn_accuracy;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::pipeline::{run_fastumap, FastUmapConfig, LandmarkBudget};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r: f64,
    pub m: usize,
    pub knn_accuracy: f64,
    pub total_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub seed: u64,
}

/// One full run per landmark ratio, all sharing the configured seed.
pub fn r_sweep(x: &DataMatrix, labels: &[usize], rs: &[f64], cfg: &FastUmapConfig) -> Result<SweepResult> {
    if rs.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::Config(format!("landmark ratios must lie in (0, 1]: {rs:?}")));
    }
    if rs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("landmark ratios must be strictly increasing: {rs:?}")));
    }
    let mut points = Vec::with_capacity(rs.len());
    for &r in rs {
        let run_cfg = FastUmapConfig { landmarks: LandmarkBudget::Ratio(r), ..cfg.clone() };
        let out = run_fastumap(x, &run_cfg)?;
        let q = knn_accuracy(&out.embedding.coords, labels, 5, 5, cfg.seed)?;
        log::info!("r={r} m={} acc={:.2} total={:.3}s", out.m(), q.mean_accuracy, out.timings.total_s);
        points.push(SweepPoint { r, m: out.m(), knn_accuracy: q.mean_accuracy, total_s: out.timings.total_s });
    }
    Ok(SweepResult { points, seed: cfg.seed })
}
