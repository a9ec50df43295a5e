use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    build_bipartite_graph, calibrate_smooth_knn, fuzzy_union, membership, CalibrationConfig, EdgeMode, GraphConfig,
};
use crate::landmarks::LandmarkSet;
use crate::matrix::{euclidean, DataMatrix};
use crate::sgd::{ForceMode, KernelConfig};

const MAX_N: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub directed_edges: usize,
    pub reference_directed_edges: usize,
    /// Directed (sample, neighbour) pairs present in exactly one graph.
    pub directed_symmetric_difference: usize,
    /// Undirected union pairs present in exactly one graph.
    pub union_symmetric_difference: usize,
    pub max_membership_delta: f64,
    pub max_union_delta: f64,
    /// Largest gap between the calibrated offset and the distance to the
    /// nearest other sample.
    pub max_rho_delta: f64,
    pub kernels_tied: bool,
}

impl EquivalenceReport {
    pub fn is_equivalent(&self, tol: f64) -> bool {
        self.directed_symmetric_difference == 0
            && self.union_symmetric_difference == 0
            && self.max_membership_delta <= tol
            && self.max_union_delta <= tol
            && self.max_rho_delta <= tol
            && self.kernels_tied
    }
}

/// Build the all-landmark graph in fuzzy-union mode and compare it with an
/// independently assembled full-kNN fuzzy graph on the same points.
pub fn equivalence_check(x: &DataMatrix, k: usize, seed: u64) -> Result<EquivalenceReport> {
    let n = x.nrows();
    if n > MAX_N {
        return Err(Error::Config(format!("equivalence check is limited to n <= {MAX_N}, got {n}")));
    }
    if k < 2 || k >= n {
        return Err(Error::Config(format!("need 2 <= k < n for the equivalence check (k={k}, n={n})")));
    }
    let calibration = CalibrationConfig::default();
    let cfg = GraphConfig { n_neighbors: k, calibration, edge_mode: EdgeMode::FuzzyUnion };
    let all = LandmarkSet::all(n);
    let fast = build_bipartite_graph(x, &all, &cfg)?;
    let fast_directed: BTreeMap<(usize, usize), f64> =
        fast.iter().map(|(i, p, w)| ((i, all.sample(p)), w)).collect();
    let fast_union: BTreeMap<(usize, usize), f64> =
        fuzzy_union(&fast, &all).into_iter().map(|(i, j, w)| ((i, j), w)).collect();

    // reference: full sort of every other point, then the shared calibration
    let mut ref_directed = BTreeMap::new();
    let mut max_rho_delta = 0.0f64;
    for i in 0..n {
        let mut order: Vec<(f64, usize)> =
            (0..n).filter(|&j| j != i).map(|j| (euclidean(x.row(i), x.row(j)), j)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order.truncate(k);
        let dists: Vec<f64> = order.iter().map(|o| o.0).collect();
        let cal = calibrate_smooth_knn(&dists, k, &calibration)?;
        for &(d, j) in &order {
            ref_directed.insert((i, j), membership(d, &cal));
        }
        max_rho_delta = max_rho_delta.max((fast.rho[i] - order[0].0).abs());
    }
    let mut ref_union: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j), &w) in &ref_directed {
        let key = (i.min(j), i.max(j));
        let back = ref_directed.get(&(j, i)).copied().unwrap_or(0.0);
        ref_union.insert(key, w + back - w * back);
    }

    let (directed_symmetric_difference, max_membership_delta) = compare(&fast_directed, &ref_directed);
    let (union_symmetric_difference, max_union_delta) = compare(&fast_union, &ref_union);
    let tied = KernelConfig { force_mode: ForceMode::Homo, ..Default::default() }.resolve()?;

    Ok(EquivalenceReport {
        n,
        k,
        seed,
        directed_edges: fast_directed.len(),
        reference_directed_edges: ref_directed.len(),
        directed_symmetric_difference,
        union_symmetric_difference,
        max_membership_delta,
        max_union_delta,
        max_rho_delta,
        kernels_tied: tied.is_homogeneous(),
    })
}

fn compare(a: &BTreeMap<(usize, usize), f64>, b: &BTreeMap<(usize, usize), f64>) -> (usize, f64) {
    let ka: BTreeSet<_> = a.keys().collect();
    let kb: BTreeSet<_> = b.keys().collect();
    let diff = ka.symmetric_difference(&kb).count();
    let delta = ka.intersection(&kb).map(|key| (a[*key] - b[*key]).abs()).fold(0.0, f64::max);
    (diff, delta)
}
