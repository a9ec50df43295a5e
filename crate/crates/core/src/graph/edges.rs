use serde::{Deserialize, Serialize};

use super::BipartiteGraph;
use crate::landmarks::LandmarkSet;

/// Which kernel the head of a directed edge uses when it is updated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadRole {
    Data,
    Landmark,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeMode {
    /// Every membership B_ip yields (i, s_p) and (s_p, i) with the same weight.
    Duplicate,
    /// Fuzzy-set union of the two directions, w_ij + w_ji - w_ij w_ji, one
    /// edge per direction. Used for the all-landmark reference comparison.
    FuzzyUnion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub head: usize,
    pub tail: usize,
    pub weight: f64,
    pub role: HeadRole,
}

#[derive(Clone, Debug, Default)]
pub struct DirectedEdgeList {
    pub edges: Vec<Edge>,
    pub n: usize,
}

impl DirectedEdgeList {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    /// Same edges with every head role flipped.
    pub fn with_swapped_roles(&self) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                role: match e.role {
                    HeadRole::Data => HeadRole::Landmark,
                    HeadRole::Landmark => HeadRole::Data,
                },
                ..*e
            })
            .collect();
        Self { edges, n: self.n }
    }
}

/// Duplicate each membership into a forward (data-role) and reverse
/// (landmark-role) edge on the sample index set.
pub fn build_edge_list(b: &BipartiteGraph, landmarks: &LandmarkSet) -> DirectedEdgeList {
    let mut edges = Vec::with_capacity(2 * b.nnz());
    for (i, p, w) in b.iter() {
        let j = landmarks.sample(p);
        if i == j || w <= 0.0 {
            continue;
        }
        edges.push(Edge {
            head: i,
            tail: j,
            weight: w,
            role: HeadRole::Data,
        });
        edges.push(Edge {
            head: j,
            tail: i,
            weight: w,
            role: HeadRole::Landmark,
        });
    }
    DirectedEdgeList { edges, n: b.n() }
}

/// Symmetric fuzzy union over sample pairs, as (i, j, weight) with i < j,
/// sorted.
pub fn fuzzy_union(b: &BipartiteGraph, landmarks: &LandmarkSet) -> Vec<(usize, usize, f64)> {
    // (lo, hi, weight of lo->hi, weight of hi->lo)
    let mut directed: Vec<(usize, usize, bool, f64)> = b
        .iter()
        .filter_map(|(i, p, w)| {
            let j = landmarks.sample(p);
            (i != j).then(|| (i.min(j), i.max(j), i < j, w))
        })
        .collect();
    directed.sort_by_key(|d| (d.0, d.1, d.2));

    let mut out = Vec::new();
    let mut idx = 0;
    while idx < directed.len() {
        let (lo, hi) = (directed[idx].0, directed[idx].1);
        let (mut fwd, mut rev) = (0.0, 0.0);
        while idx < directed.len() && directed[idx].0 == lo && directed[idx].1 == hi {
            if directed[idx].2 {
                fwd = directed[idx].3;
            } else {
                rev = directed[idx].3;
            }
            idx += 1;
        }
        out.push((lo, hi, fwd + rev - fwd * rev));
    }
    out
}

/// Directed edge list from the fuzzy union: both directions of every pair,
/// data role on both heads.
pub fn union_edge_list(b: &BipartiteGraph, landmarks: &LandmarkSet) -> DirectedEdgeList {
    let mut edges = Vec::new();
    for (i, j, w) in fuzzy_union(b, landmarks) {
        if w <= 0.0 {
            continue;
        }
        edges.push(Edge {
            head: i,
            tail: j,
            weight: w,
            role: HeadRole::Data,
        });
        edges.push(Edge {
            head: j,
            tail: i,
            weight: w,
            role: HeadRole::Data,
        });
    }
    DirectedEdgeList { edges, n: b.n() }
}
