use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    /// Tolerance on |row sum - log2 k|.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { tol: 1e-5, max_iter: 64 }
    }
}

/// Offset and bandwidth of one sample's membership kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub rho: f64,
    pub sigma: f64,
    /// The row-sum target was out of reach and sigma sits on a clamp.
    pub degenerate: bool,
}

#[inline]
fn membership_sum(distances: &[f64], rho: f64, sigma: f64) -> f64 {
    distances
        .iter()
        .map(|&d| {
            let excess = d - rho;
            if excess > 0.0 {
                (-excess / sigma).exp()
            } else {
                1.0
            }
        })
        .sum()
}

/// Smooth-kNN calibration of one row of ascending neighbor distances:
/// rho is the nearest distance, sigma is bisected so the memberships sum to
/// log2(k).
pub fn calibrate_smooth_knn(distances: &[f64], k: usize, cfg: &CalibrationConfig) -> Result<Calibration> {
    if k < 2 {
        return Err(Error::Config(format!(
            "n_neighbors={k}: calibration needs k >= 2 (log2 k must be positive)"
        )));
    }
    if distances.is_empty() {
        return Err(Error::InvalidData("empty neighbor row".into()));
    }
    let target = (k as f64).log2();
    let rho = distances[0];
    let len = distances.len() as f64;
    let mean_dist = distances.iter().sum::<f64>() / len;
    let mean_excess = distances.iter().map(|d| (d - rho).max(0.0)).sum::<f64>() / len;
    let sigma_min = if mean_dist > 0.0 { 1e-3 * mean_dist } else { 1e-3 };

    // all neighbors at distance rho: every weight is 1 whatever sigma is
    if mean_excess <= 0.0 {
        return Ok(Calibration {
            rho,
            sigma: sigma_min,
            degenerate: true,
        });
    }

    let mut lo = 0.0;
    let mut hi = 1e3 * mean_excess;
    if membership_sum(distances, rho, hi) < target - cfg.tol {
        return Ok(Calibration {
            rho,
            sigma: hi,
            degenerate: true,
        });
    }
    let mut sigma = hi;
    for _ in 0..cfg.max_iter {
        sigma = 0.5 * (lo + hi);
        let s = membership_sum(distances, rho, sigma);
        if (s - target).abs() < cfg.tol {
            break;
        }
        if s > target {
            hi = sigma;
        } else {
            lo = sigma;
        }
    }
    let mut degenerate = false;
    if sigma < sigma_min {
        sigma = sigma_min;
        degenerate = (membership_sum(distances, rho, sigma) - target).abs() > cfg.tol;
    }
    Ok(Calibration { rho, sigma, degenerate })
}

#[inline]
pub fn membership(distance: f64, cal: &Calibration) -> f64 {
    let excess = distance - cal.rho;
    if excess > 0.0 {
        (-excess / cal.sigma).exp()
    } else {
        1.0
    }
}
