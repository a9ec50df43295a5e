use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{attractive_gradient, clip, repulsive_gradient, KernelParams};
use super::schedule::{build_sampling_schedule, SamplingSchedule};
use crate::error::{Error, Result};
use crate::graph::{DirectedEdgeList, Edge, HeadRole};
use crate::rng::StageRng;

const PARALLEL_CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// None picks 200 epochs for n >= 10000 and 500 otherwise.
    pub epochs: Option<usize>,
    pub initial_lr: f64,
    /// Negative samples drawn per attractive update.
    pub negative_rate: usize,
    /// Per-coordinate bound on a single gradient step.
    pub clip: f64,
    /// Added to the squared distance in the repulsive denominator.
    pub eps: f64,
    /// Apply the opposite attractive step to the tail as well.
    pub move_tail: bool,
    /// Sequential edge order with one RNG stream; bit-reproducible.
    pub deterministic: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epochs: None,
            initial_lr: 1.0,
            negative_rate: 5,
            clip: 4.0,
            eps: 1e-3,
            move_tail: true,
            deterministic: true,
        }
    }
}

pub fn default_epochs(n: usize) -> usize {
    if n >= 10_000 {
        200
    } else {
        500
    }
}

impl OptimizerConfig {
    pub fn resolved_epochs(&self, n: usize) -> usize {
        self.epochs.unwrap_or_else(|| default_epochs(n))
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == Some(0) {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.initial_lr)));
        }
        if self.clip.is_nan() || self.clip <= 0.0 {
            return Err(Error::Config(format!("clip must be positive, got {}", self.clip)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be non-negative, got {}", self.eps)));
        }
        Ok(())
    }
}

/// Attractive updates applied per head role.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleCounts {
    pub data: u64,
    pub landmark: u64,
}

impl RoleCounts {
    fn add(self, o: RoleCounts) -> RoleCounts {
        RoleCounts {
            data: self.data + o.data,
            landmark: self.landmark + o.landmark,
        }
    }

    #[inline]
    fn bump(&mut self, role: HeadRole) {
        match role {
            HeadRole::Data => self.data += 1,
            HeadRole::Landmark => self.landmark += 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub coords: Vec<[f64; 2]>,
    pub epochs: usize,
    pub role_updates: RoleCounts,
}

/// Called after each completed epoch with (epochs done, current layout).
pub type EpochObserver<'a> = &'a mut dyn FnMut(usize, &[[f64; 2]]);

/// Edge-sampled SGD on the directed edge list, starting from `init`.
pub fn optimize(
    init: &[[f64; 2]],
    edges: &DirectedEdgeList,
    kernels: &KernelParams,
    cfg: &OptimizerConfig,
    seed: u64,
    observer: Option<EpochObserver<'_>>,
) -> Result<OptimizeOutcome> {
    cfg.validate()?;
    let n = init.len();
    if n != edges.n {
        return Err(Error::InvalidData(format!(
            "layout has {n} points but the edge list spans {}",
            edges.n
        )));
    }
    if n < 2 {
        return Err(Error::InvalidData("need at least two points".into()));
    }
    if let Some(e) = edges.edges.iter().find(|e| e.head >= n || e.tail >= n) {
        return Err(Error::InvalidData(format!("edge {} -> {} out of range", e.head, e.tail)));
    }
    if init.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::InvalidData("initial layout has non-finite coordinates".into()));
    }
    let epochs = cfg.resolved_epochs(n);
    let schedule = build_sampling_schedule(edges, epochs)?;
    if cfg.deterministic {
        run_sequential(init, edges, &schedule, kernels, cfg, seed, observer)
    } else {
        run_parallel(init, edges, &schedule, kernels, cfg, seed, observer)
    }
}

#[inline]
fn learning_rate(cfg: &OptimizerConfig, epoch: usize, epochs: usize) -> f64 {
    cfg.initial_lr * (1.0 - epoch as f64 / epochs as f64)
}

#[inline]
fn finite(p: [f64; 2]) -> bool {
    p[0].is_finite() && p[1].is_finite()
}

fn run_sequential(
    init: &[[f64; 2]],
    edges: &DirectedEdgeList,
    schedule: &SamplingSchedule,
    kernels: &KernelParams,
    cfg: &OptimizerConfig,
    seed: u64,
    mut observer: Option<EpochObserver<'_>>,
) -> Result<OptimizeOutcome> {
    let n = init.len();
    let epochs = schedule.epochs();
    let counts = schedule.counts();
    let mut z = init.to_vec();
    let mut next = vec![0u32; edges.len()];
    let mut rng = StageRng::seed_from_u64(seed);
    let mut roles = RoleCounts::default();

    for t in 0..epochs {
        let alpha = learning_rate(cfg, t, epochs);
        for (idx, e) in edges.edges.iter().enumerate() {
            let j = next[idx];
            if j >= counts[idx] || schedule.event_epoch(idx, j) != t {
                continue;
            }
            next[idx] = j + 1;
            let Edge { head: u, tail: v, role, .. } = *e;
            let k = kernels.for_role(role);
            roles.bump(role);

            let g = clip(attractive_gradient(z[u], z[v], k), cfg.clip);
            z[u][0] += alpha * g[0];
            z[u][1] += alpha * g[1];
            if cfg.move_tail {
                z[v][0] -= alpha * g[0];
                z[v][1] -= alpha * g[1];
            }
            for _ in 0..cfg.negative_rate {
                let s = rng.random_range(0..n);
                if s == u {
                    continue;
                }
                let g = clip(repulsive_gradient(z[u], z[s], k, cfg.eps), cfg.clip);
                z[u][0] += alpha * g[0];
                z[u][1] += alpha * g[1];
            }
            if !finite(z[u]) || !finite(z[v]) {
                return Err(Error::NonFinite { epoch: t, edge: idx, head: u, tail: v });
            }
        }
        if let Some(obs) = observer.as_mut() {
            obs(t + 1, &z);
        }
    }
    Ok(OptimizeOutcome { coords: z, epochs, role_updates: roles })
}

struct AtomicLayout(Vec<[AtomicU64; 2]>);

impl AtomicLayout {
    fn new(z: &[[f64; 2]]) -> Self {
        Self(
            z.iter()
                .map(|p| [AtomicU64::new(p[0].to_bits()), AtomicU64::new(p[1].to_bits())])
                .collect(),
        )
    }

    #[inline]
    fn load(&self, i: usize) -> [f64; 2] {
        let p = &self.0[i];
        [
            f64::from_bits(p[0].load(Ordering::Relaxed)),
            f64::from_bits(p[1].load(Ordering::Relaxed)),
        ]
    }

    #[inline]
    fn add(&self, i: usize, d: [f64; 2]) -> [f64; 2] {
        let cur = self.load(i);
        let new = [cur[0] + d[0], cur[1] + d[1]];
        self.0[i][0].store(new[0].to_bits(), Ordering::Relaxed);
        self.0[i][1].store(new[1].to_bits(), Ordering::Relaxed);
        new
    }

    fn snapshot(&self) -> Vec<[f64; 2]> {
        (0..self.0.len()).map(|i| self.load(i)).collect()
    }
}

/// Lock-free updates across edge chunks. Races between chunks touching the
/// same point may drop an update, which SGD tolerates.
fn run_parallel(
    init: &[[f64; 2]],
    edges: &DirectedEdgeList,
    schedule: &SamplingSchedule,
    kernels: &KernelParams,
    cfg: &OptimizerConfig,
    seed: u64,
    mut observer: Option<EpochObserver<'_>>,
) -> Result<OptimizeOutcome> {
    let n = init.len();
    let epochs = schedule.epochs();
    let counts = schedule.counts();
    let z = AtomicLayout::new(init);
    let mut next = vec![0u32; edges.len()];
    let n_chunks = edges.len().div_ceil(PARALLEL_CHUNK) as u64;
    let mut roles = RoleCounts::default();

    for t in 0..epochs {
        let alpha = learning_rate(cfg, t, epochs);
        let z = &z;
        let per_chunk: Vec<RoleCounts> = edges
            .edges
            .par_chunks(PARALLEL_CHUNK)
            .zip(next.par_chunks_mut(PARALLEL_CHUNK))
            .enumerate()
            .map(|(c, (chunk, next))| -> Result<RoleCounts> {
                let mut rng = StageRng::seed_from_u64(seed);
                rng.set_stream(t as u64 * n_chunks + c as u64);
                let base = c * PARALLEL_CHUNK;
                let mut roles = RoleCounts::default();
                for (off, e) in chunk.iter().enumerate() {
                    let idx = base + off;
                    let j = next[off];
                    if j >= counts[idx] || schedule.event_epoch(idx, j) != t {
                        continue;
                    }
                    next[off] = j + 1;
                    let Edge { head: u, tail: v, role, .. } = *e;
                    let k = kernels.for_role(role);
                    roles.bump(role);

                    let g = clip(attractive_gradient(z.load(u), z.load(v), k), cfg.clip);
                    let mut zu = z.add(u, [alpha * g[0], alpha * g[1]]);
                    let zv = if cfg.move_tail {
                        z.add(v, [-alpha * g[0], -alpha * g[1]])
                    } else {
                        z.load(v)
                    };
                    for _ in 0..cfg.negative_rate {
                        let s = rng.random_range(0..n);
                        if s == u {
                            continue;
                        }
                        let g = clip(repulsive_gradient(zu, z.load(s), k, cfg.eps), cfg.clip);
                        zu = z.add(u, [alpha * g[0], alpha * g[1]]);
                    }
                    if !finite(zu) || !finite(zv) {
                        return Err(Error::NonFinite { epoch: t, edge: idx, head: u, tail: v });
                    }
                }
                Ok(roles)
            })
            .collect::<Result<_>>()?;
        roles = per_chunk.into_iter().fold(roles, RoleCounts::add);
        if let Some(obs) = observer.as_mut() {
            obs(t + 1, &z.snapshot());
        }
    }
    Ok(OptimizeOutcome { coords: z.snapshot(), epochs, role_updates: roles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sgd::kernel::fit_kernel_params;

    fn params() -> KernelParams {
        KernelParams {
            data: fit_kernel_params(0.1, 1.0).unwrap(),
            landmark: fit_kernel_params(0.2, 1.0).unwrap(),
        }
    }

    fn edge(head: usize, tail: usize, weight: f64, role: HeadRole) -> Edge {
        Edge { head, tail, weight, role }
    }

    fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    /// Small ring with chords, both directions, mixed roles.
    fn ring(n: usize) -> (Vec<[f64; 2]>, DirectedEdgeList) {
        let mut edges = Vec::new();
        for i in 0..n {
            for step in [1, 3] {
                let j = (i + step) % n;
                let w = 1.0 / step as f64;
                edges.push(edge(i, j, w, HeadRole::Data));
                edges.push(edge(j, i, w, HeadRole::Landmark));
            }
        }
        let init = (0..n)
            .map(|i| {
                let f = i as f64 * 0.37;
                [5.0 * f.sin() + 0.1 * i as f64, 5.0 * (1.3 * f).cos()]
            })
            .collect();
        (init, DirectedEdgeList { edges, n })
    }

    fn cfg(epochs: usize) -> OptimizerConfig {
        OptimizerConfig { epochs: Some(epochs), ..Default::default() }
    }

    #[test]
    fn default_epoch_rule() {
        assert_eq!(default_epochs(9_999), 500);
        assert_eq!(default_epochs(10_000), 200);
    }

    #[test]
    fn two_points_attract() {
        let edges = DirectedEdgeList {
            edges: vec![edge(0, 1, 1.0, HeadRole::Data), edge(1, 0, 1.0, HeadRole::Landmark)],
            n: 2,
        };
        let c = OptimizerConfig { negative_rate: 0, ..cfg(200) };
        let out = optimize(&[[0.0, 0.0], [3.0, 0.0]], &edges, &params(), &c, 1, None).unwrap();
        assert!(dist(out.coords[0], out.coords[1]) < 0.5, "{:?}", out.coords);
    }

    #[test]
    fn repulsion_pushes_apart() {
        // a single feather-weight edge: almost all motion is repulsive
        let edges = DirectedEdgeList {
            edges: vec![edge(0, 1, 1.0, HeadRole::Data)],
            n: 2,
        };
        let c = OptimizerConfig { move_tail: false, ..cfg(1) };
        let k = params();
        let init = [[0.0, 0.0], [0.05, 0.0]];
        // attractive step alone vs. attractive + 5 repulsive draws
        let no_neg = optimize(&init, &edges, &k, &OptimizerConfig { negative_rate: 0, ..c.clone() }, 3, None).unwrap();
        let with_neg = optimize(&init, &edges, &k, &c, 3, None).unwrap();
        assert!(dist(with_neg.coords[0], init[1]) > dist(no_neg.coords[0], init[1]));
    }

    #[test]
    fn deterministic_mode_is_bit_identical() {
        let (init, edges) = ring(40);
        let a = optimize(&init, &edges, &params(), &cfg(60), 11, None).unwrap();
        let b = optimize(&init, &edges, &params(), &cfg(60), 11, None).unwrap();
        let bits = |v: &[[f64; 2]]| v.iter().flat_map(|p| [p[0].to_bits(), p[1].to_bits()]).collect::<Vec<_>>();
        assert_eq!(bits(&a.coords), bits(&b.coords));
        let c = optimize(&init, &edges, &params(), &cfg(60), 12, None).unwrap();
        assert_ne!(bits(&a.coords), bits(&c.coords));
    }

    #[test]
    fn translation_equivariance() {
        let (init, edges) = ring(30);
        let shift = [37.5, -12.25];
        let moved: Vec<[f64; 2]> = init.iter().map(|p| [p[0] + shift[0], p[1] + shift[1]]).collect();
        let a = optimize(&init, &edges, &params(), &cfg(5), 4, None).unwrap();
        let b = optimize(&moved, &edges, &params(), &cfg(5), 4, None).unwrap();
        for (p, q) in a.coords.iter().zip(&b.coords) {
            assert!((q[0] - shift[0] - p[0]).abs() < 1e-6 && (q[1] - shift[1] - p[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn homogeneous_role_swap_is_identical() {
        let (init, edges) = ring(25);
        let k = KernelParams::homogeneous(fit_kernel_params(0.1, 1.0).unwrap());
        let a = optimize(&init, &edges, &k, &cfg(30), 8, None).unwrap();
        let b = optimize(&init, &edges.with_swapped_roles(), &k, &cfg(30), 8, None).unwrap();
        assert_eq!(a.coords, b.coords);
        assert_eq!(a.role_updates.data, b.role_updates.landmark);
        assert_eq!(a.role_updates.landmark, b.role_updates.data);
    }

    #[test]
    fn role_dispatch_counts() {
        let (init, edges) = ring(20);
        let out = optimize(&init, &edges, &params(), &cfg(50), 2, None).unwrap();
        let sched = build_sampling_schedule(&edges, 50).unwrap();
        let mut want = RoleCounts::default();
        for (e, &c) in edges.edges.iter().zip(sched.counts()) {
            for _ in 0..c {
                want.bump(e.role);
            }
        }
        assert_eq!(out.role_updates, want);
        assert!(want.data > 0 && want.landmark > 0);
    }

    #[test]
    fn observer_sees_every_epoch() {
        let (init, edges) = ring(12);
        let mut seen = Vec::new();
        let mut obs = |t: usize, z: &[[f64; 2]]| seen.push((t, z.len()));
        optimize(&init, &edges, &params(), &cfg(7), 2, Some(&mut obs)).unwrap();
        assert_eq!(seen, (1..=7).map(|t| (t, 12)).collect::<Vec<_>>());
    }

    #[test]
    fn parallel_mode_runs_and_contracts_clusters() {
        let (init, edges) = ring(50);
        let c = OptimizerConfig { deterministic: false, ..cfg(100) };
        let out = optimize(&init, &edges, &params(), &c, 5, None).unwrap();
        assert!(out.coords.iter().all(|&p| finite(p)));
        let seq = optimize(&init, &edges, &params(), &cfg(100), 5, None).unwrap();
        assert_eq!(out.role_updates, seq.role_updates);
    }

    #[test]
    fn non_finite_gradient_aborts() {
        // the difference of two finite extremes overflows
        let edges = DirectedEdgeList {
            edges: vec![edge(0, 1, 1.0, HeadRole::Data)],
            n: 2,
        };
        let err = optimize(&[[1e308, 0.0], [-1e308, 0.0]], &edges, &params(), &cfg(3), 1, None).unwrap_err();
        assert!(matches!(err, Error::NonFinite { epoch: 0, edge: 0, head: 0, tail: 1 }), "{err}");
    }

    #[test]
    fn rejects_bad_input() {
        let (init, edges) = ring(10);
        assert!(optimize(&init[..9], &edges, &params(), &cfg(5), 1, None).is_err());
        let mut bad = init.clone();
        bad[3][0] = f64::NAN;
        assert!(optimize(&bad, &edges, &params(), &cfg(5), 1, None).is_err());
        assert!(optimize(&init, &edges, &params(), &OptimizerConfig { initial_lr: 0.0, ..cfg(5) }, 1, None).is_err());
    }
}
