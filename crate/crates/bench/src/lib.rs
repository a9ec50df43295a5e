//! Shared fixtures for the benchmarks.

use fastumap_core::graph::{build_bipartite_graph, build_edge_list, BipartiteGraph, DirectedEdgeList, GraphConfig};
use fastumap_core::synthetic::gaussian_blobs;
use fastumap_core::{sample_landmarks, DataMatrix, LandmarkSet};

pub const SEED: u64 = 42;

/// Ten 10-dimensional Gaussian blobs.
pub fn blobs(n: usize) -> DataMatrix {
    gaussian_blobs(n, 10, 10, 8.0, SEED).expect("valid sizes").0
}

pub struct Fixture {
    pub x: DataMatrix,
    pub landmarks: LandmarkSet,
    pub graph: BipartiteGraph,
    pub edges: DirectedEdgeList,
}

pub fn fixture(n: usize, m: usize) -> Fixture {
    let x = blobs(n);
    let landmarks = sample_landmarks(n, m, SEED).expect("m <= n");
    let graph = build_bipartite_graph(&x, &landmarks, &GraphConfig::default()).expect("graph");
    let edges = build_edge_list(&graph, &landmarks);
    Fixture { x, landmarks, graph, edges }
}
