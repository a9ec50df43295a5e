//! Landmark selection: landmarks are a subset of the samples themselves.

use rand::seq::index;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StageRng;

/// Landmark slots. Slot `p` refers to sample `indices[p]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    indices: Vec<usize>,
    n: usize,
}

impl LandmarkSet {
    /// Build from explicit sample indices (sorted and checked for duplicates).
    pub fn from_indices(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.is_empty() {
            return Err(Error::Config("landmark set is empty".into()));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate landmark index".into()));
        }
        if *indices.last().unwrap() >= n {
            return Err(Error::Config(format!("landmark index out of range for n={n}")));
        }
        Ok(Self { indices, n })
    }

    /// All samples as landmarks, slot p = sample p.
    pub fn all(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            n,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ratio(&self) -> f64 {
        self.m() as f64 / self.n as f64
    }

    /// Sample index behind slot `p`.
    #[inline]
    pub fn sample(&self, slot: usize) -> usize {
        self.indices[slot]
    }

    /// Slot of sample `i`, if it is a landmark.
    pub fn slot_of(&self, sample: usize) -> Option<usize> {
        self.indices.binary_search(&sample).ok()
    }

    /// Per-sample slot lookup table (`usize::MAX` for non-landmarks).
    pub fn slot_table(&self) -> Vec<usize> {
        let mut t = vec![usize::MAX; self.n];
        for (p, &s) in self.indices.iter().enumerate() {
            t[s] = p;
        }
        t
    }
}

/// Capped-adaptive budget: n/2 below 500 samples, 7n/10 from there on,
/// limited by `cap`. Fractions are truncated. The cap only binds past 5000
/// samples for any cap >= 3500, and applying it everywhere keeps the budget
/// monotone and below the cap for smaller caps too.
pub fn default_landmark_budget(n: usize, cap: Option<usize>) -> usize {
    let raw = if n < 500 { n / 2 } else { 7 * n / 10 };
    let capped = cap.map_or(raw, |c| raw.min(c));
    capped.clamp(1, n.max(1))
}

/// Uniform draw of `m` distinct samples, returned sorted.
pub fn sample_landmarks(n: usize, m: usize, seed: u64) -> Result<LandmarkSet> {
    if m == 0 || m > n {
        return Err(Error::Config(format!("cannot draw {m} landmarks from {n} samples")));
    }
    if m == n {
        return Ok(LandmarkSet::all(n));
    }
    let mut rng = StageRng::seed_from_u64(seed);
    let mut indices = index::sample(&mut rng, n, m).into_vec();
    indices.sort_unstable();
    Ok(LandmarkSet { indices, n })
}
