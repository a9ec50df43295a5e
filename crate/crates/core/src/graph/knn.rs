use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::landmarks::LandmarkSet;
use crate::matrix::{squared_euclidean, DataMatrix};

/// k nearest landmark slots per sample, nearest first.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborTable {
    k: usize,
    indices: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighborTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.indices.len() / self.k
    }

    /// Landmark slots for sample `i`.
    pub fn slots(&self, i: usize) -> &[usize] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }
}

#[inline]
fn by_distance_then_slot(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Exact brute-force search from every sample to the landmark set. A sample
/// never lists its own slot; ties go to the lower slot.
pub fn knn_to_landmarks(x: &DataMatrix, landmarks: &LandmarkSet, k: usize) -> Result<NeighborTable> {
    let m = landmarks.m();
    if k == 0 {
        return Err(Error::Config("n_neighbors must be positive".into()));
    }
    // every landmark is also a sample, so its own slot is unavailable
    if k >= m {
        return Err(Error::Config(format!(
            "n_neighbors={k} needs at least {} landmarks, have {m}",
            k + 1
        )));
    }
    let n = x.nrows();
    let slot_of = landmarks.slot_table();
    let mut indices = vec![0usize; n * k];
    let mut distances = vec![0.0f64; n * k];

    indices
        .par_chunks_mut(k)
        .zip(distances.par_chunks_mut(k))
        .enumerate()
        .for_each_init(
            || Vec::with_capacity(m),
            |cand, (i, (idx_out, dist_out))| {
                cand.clear();
                let xi = x.row(i);
                let own = slot_of[i];
                for (p, &s) in landmarks.indices().iter().enumerate() {
                    if p == own {
                        continue;
                    }
                    cand.push((squared_euclidean(xi, x.row(s)), p));
                }
                cand.select_nth_unstable_by(k - 1, by_distance_then_slot);
                let top = &mut cand[..k];
                top.sort_unstable_by(by_distance_then_slot);
                for (j, &(d2, p)) in top.iter().enumerate() {
                    idx_out[j] = p;
                    dist_out[j] = d2.sqrt();
                }
            },
        );

    Ok(NeighborTable { k, indices, distances })
}
