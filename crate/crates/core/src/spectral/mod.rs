//! Reduced spectral warm start: landmark affinity, its normalized operator,
//! and the Nystrom projection of every sample through its memberships.

mod affinity;
mod eigen;

pub use affinity::{landmark_affinity, LandmarkAffinity, SymCsr};
pub use eigen::{lanczos_top, top_nontrivial_eigenvectors, EigenResult, EigensolverConfig, SolverPath, SpectralBasis};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::rng::stage_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    pub eigensolver: EigensolverConfig,
    /// Largest absolute initial coordinate after rescaling.
    pub radius: f64,
    /// Standard deviation of the tie-breaking noise.
    pub jitter: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            eigensolver: EigensolverConfig::default(),
            radius: 10.0,
            jitter: 1e-4,
        }
    }
}

/// Z_init = diag(B 1)^-1 B U: each sample averages its landmarks' rows of U.
pub fn nystrom_project(b: &BipartiteGraph, basis: &SpectralBasis) -> Result<Vec<[f64; 2]>> {
    if basis.u.len() != b.m() {
        return Err(Error::Config(format!(
            "basis has {} rows, graph has {} landmarks",
            basis.u.len(),
            b.m()
        )));
    }
    (0..b.n())
        .map(|i| {
            let (slots, w) = b.row(i);
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return Err(Error::IsolatedSample { sample: i });
            }
            let mut z = [0.0; 2];
            for (&p, &v) in slots.iter().zip(w) {
                z[0] += v * basis.u[p][0];
                z[1] += v * basis.u[p][1];
            }
            Ok([z[0] / total, z[1] / total])
        })
        .collect()
}

/// Rescale so the largest absolute coordinate equals `radius`, then add
/// seeded Gaussian noise of scale `jitter`. A layout with no spread becomes
/// pure noise.
pub fn scale_init(z: &[[f64; 2]], radius: f64, jitter: f64, seed: u64) -> Vec<[f64; 2]> {
    let max_abs = z.iter().flat_map(|r| r.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    let spread = z.iter().any(|r| r != &z[0]);
    let factor = if max_abs > 0.0 && spread {
        radius / max_abs
    } else {
        log::warn!("initial layout has no spread; falling back to jitter only");
        0.0
    };
    let mut rng = stage_rng(seed, "init-jitter");
    let noise = Normal::new(0.0, jitter.max(0.0)).expect("finite jitter");
    z.iter()
        .map(|r| {
            let mut out = [r[0] * factor, r[1] * factor];
            if jitter > 0.0 {
                out[0] += noise.sample(&mut rng);
                out[1] += noise.sample(&mut rng);
            }
            out
        })
        .collect()
}

/// Uniform layout in [-radius, radius]^2.
pub fn random_init(n: usize, radius: f64, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = stage_rng(seed, "random-init");
    (0..n)
        .map(|_| [rng.random_range(-radius..=radius), rng.random_range(-radius..=radius)])
        .collect()
}

#[derive(Clone, Debug)]
pub struct SpectralInit {
    pub basis: SpectralBasis,
    /// Unscaled Nystrom coordinates.
    pub projected: Vec<[f64; 2]>,
    /// Rescaled, jittered starting layout.
    pub layout: Vec<[f64; 2]>,
    pub components: usize,
}

/// Spectral warm start. When the landmark graph falls apart, the largest
/// component is embedded spectrally and every other component is parked at
/// a seeded random point inside its bounding box.
pub fn spectral_init(b: &BipartiteGraph, cfg: &SpectralConfig, seed: u64) -> Result<SpectralInit> {
    let aff = landmark_affinity(b)?;
    let comps = aff.components();
    let eig_cfg = EigensolverConfig {
        seed: crate::rng::derive_seed(seed, "eigensolver"),
        ..cfg.eigensolver.clone()
    };
    let basis = if comps.len() <= 1 {
        top_nontrivial_eigenvectors(&aff, &eig_cfg)?
    } else {
        log::warn!(
            "landmark graph has {} components; embedding the largest ({} landmarks) spectrally",
            comps.len(),
            comps[0].len()
        );
        let main = &comps[0];
        let w = aff.w.restrict(main);
        let dl = main.iter().map(|&p| aff.dl[p]).collect();
        let sub = LandmarkAffinity { w, dx: Vec::new(), dl };
        let sub_basis = top_nontrivial_eigenvectors(&sub, &eig_cfg)?;
        let mut u = vec![[0.0; 2]; aff.m()];
        for (r, &p) in main.iter().enumerate() {
            u[p] = sub_basis.u[r];
        }
        let lo = [0, 1].map(|c| sub_basis.u.iter().map(|r| r[c]).fold(f64::INFINITY, f64::min));
        let hi = [0, 1].map(|c| sub_basis.u.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max));
        let mut rng = stage_rng(seed, "component-offsets");
        for comp in &comps[1..] {
            let centre = [0, 1].map(|c| if hi[c] > lo[c] { rng.random_range(lo[c]..=hi[c]) } else { lo[c] });
            for &p in comp {
                u[p] = centre;
            }
        }
        SpectralBasis { u, ..sub_basis }
    };
    let projected = nystrom_project(b, &basis)?;
    let layout = scale_init(&projected, cfg.radius, cfg.jitter, seed);
    Ok(SpectralInit {
        basis,
        projected,
        layout,
        components: comps.len(),
    })
}
