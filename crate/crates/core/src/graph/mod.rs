//! Sparse sample-to-landmark fuzzy graph and the directed edge list the
//! layout optimizer samples from.

mod calibrate;
mod edges;
mod knn;

pub use calibrate::{calibrate_smooth_knn, membership, Calibration, CalibrationConfig};
pub use edges::{build_edge_list, fuzzy_union, union_edge_list, DirectedEdgeList, Edge, EdgeMode, HeadRole};
pub use knn::{knn_to_landmarks, NeighborTable};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::landmarks::LandmarkSet;
use crate::matrix::DataMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    pub n_neighbors: usize,
    pub calibration: CalibrationConfig,
    pub edge_mode: EdgeMode,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            n_neighbors: 15,
            calibration: CalibrationConfig::default(),
            edge_mode: EdgeMode::Duplicate,
        }
    }
}

/// n x m membership matrix in CSR form, with per-row calibration.
#[derive(Clone, Debug)]
pub struct BipartiteGraph {
    m: usize,
    k: usize,
    indptr: Vec<usize>,
    slots: Vec<usize>,
    weights: Vec<f64>,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl BipartiteGraph {
    /// Assemble from explicit CSR parts; rows need not be calibrated.
    pub fn from_csr(m: usize, k: usize, indptr: Vec<usize>, slots: Vec<usize>, weights: Vec<f64>) -> Self {
        let n = indptr.len() - 1;
        Self {
            m,
            k,
            indptr,
            slots,
            weights,
            rho: vec![0.0; n],
            sigma: vec![1.0; n],
            degenerate: vec![false; n],
        }
    }

    pub fn n(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// (slots, weights) of row i.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.slots[r.clone()], &self.weights[r])
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.row_sum(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |i| {
            let (s, w) = self.row(i);
            s.iter().zip(w).map(move |(&p, &v)| (i, p, v))
        })
    }

    /// Fraction of rows whose sum is within `tol` of log2 k, plus the count
    /// of flagged degenerate rows.
    pub fn calibration_report(&self, tol: f64) -> CalibrationReport {
        let target = (self.k as f64).log2();
        let mut within = 0;
        let mut off_unflagged = 0;
        for i in 0..self.n() {
            let ok = (self.row_sum(i) - target).abs() <= tol;
            within += usize::from(ok);
            off_unflagged += usize::from(!ok && !self.degenerate[i]);
        }
        CalibrationReport {
            rows: self.n(),
            within_tol: within,
            degenerate: self.degenerate.iter().filter(|&&d| d).count(),
            off_target_unflagged: off_unflagged,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CalibrationReport {
    pub rows: usize,
    pub within_tol: usize,
    pub degenerate: usize,
    pub off_target_unflagged: usize,
}

impl CalibrationReport {
    pub fn fraction_within(&self) -> f64 {
        self.within_tol as f64 / self.rows.max(1) as f64
    }
}

/// Calibrate every row of a neighbor table.
pub fn calibrate_rows(nt: &NeighborTable, cfg: &CalibrationConfig) -> Result<Vec<Calibration>> {
    (0..nt.n())
        .into_par_iter()
        .map(|i| calibrate_smooth_knn(nt.distances(i), nt.k(), cfg))
        .collect()
}

/// Membership weights exp(-max(d - rho, 0) / sigma) on each row's neighbors.
pub fn compute_memberships(nt: &NeighborTable, calib: &[Calibration], m: usize) -> BipartiteGraph {
    let n = nt.n();
    let k = nt.k();
    let mut indptr = Vec::with_capacity(n + 1);
    let mut slots = Vec::with_capacity(n * k);
    let mut weights = Vec::with_capacity(n * k);
    indptr.push(0);
    for (i, cal) in calib.iter().enumerate() {
        for (&p, &d) in nt.slots(i).iter().zip(nt.distances(i)) {
            let w = membership(d, cal);
            if w > 0.0 {
                slots.push(p);
                weights.push(w);
            }
        }
        indptr.push(slots.len());
    }
    BipartiteGraph {
        m,
        k,
        indptr,
        slots,
        weights,
        rho: calib.iter().map(|c| c.rho).collect(),
        sigma: calib.iter().map(|c| c.sigma).collect(),
        degenerate: calib.iter().map(|c| c.degenerate).collect(),
    }
}

/// kNN search, calibration and memberships in one call.
pub fn build_bipartite_graph(x: &DataMatrix, landmarks: &LandmarkSet, cfg: &GraphConfig) -> Result<BipartiteGraph> {
    let nt = knn_to_landmarks(x, landmarks, cfg.n_neighbors)?;
    let calib = calibrate_rows(&nt, &cfg.calibration)?;
    Ok(compute_memberships(&nt, &calib, landmarks.m()))
}
