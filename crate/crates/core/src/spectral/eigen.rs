//! Leading non-trivial eigenpairs of the normalized landmark operator.
//!
//! The trivial pair (eigenvalue 1, eigenvector D_l^1/2 1) is known in closed
//! form and deflated exactly. Small problems go through a dense symmetric
//! eigendecomposition; larger ones through thick-restart Lanczos with full
//! reorthogonalization, touching the operator only through sparse matvecs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LandmarkAffinity;
use crate::error::{Error, Result};
use crate::rng::StageRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigensolverConfig {
    /// Budget of operator applications.
    pub max_iter: usize,
    pub residual_tol: f64,
    pub seed: u64,
    /// Krylov subspace size before a restart.
    pub krylov_dim: usize,
    /// Use the dense solver when m is at most this.
    pub dense_threshold: usize,
}

impl Default for EigensolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            residual_tol: 1e-9,
            seed: 0,
            krylov_dim: 48,
            dense_threshold: 512,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Dense,
    Lanczos,
}

/// Two leading non-trivial eigenvectors as the rows of an m x 2 matrix.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    pub u: Vec<[f64; 2]>,
    pub eigenvalues: [f64; 2],
    pub residuals: [f64; 2],
    pub matvecs: usize,
    pub path: SolverPath,
}

impl SpectralBasis {
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.u.iter().map(|r| r[c]).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two passes of classical Gram-Schmidt against `basis` and `deflate`.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>], deflate: &[f64]) {
    for _ in 0..2 {
        let c = dot(v, deflate);
        axpy(-c, deflate, v);
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Make the entry of largest magnitude positive.
fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if v[pivot] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
}

/// Top `nev` eigenpairs of a symmetric operator restricted to the
/// orthogonal complement of the unit vector `deflate`.
pub fn lanczos_top<F>(op: F, dim: usize, deflate: &[f64], nev: usize, cfg: &EigensolverConfig) -> Result<EigenResult>
where
    F: Fn(&[f64], &mut [f64]),
{
    let space = dim.saturating_sub(1);
    if nev == 0 || nev > space {
        return Err(Error::Config(format!(
            "need {nev} non-trivial eigenpairs from a {dim}-dimensional operator"
        )));
    }
    let kmax = cfg.krylov_dim.max(2 * nev + 2).min(space);
    let keep = (kmax / 2).max(nev + 1).min(kmax.saturating_sub(1)).max(nev);
    let mut rng = StageRng::seed_from_u64(cfg.seed);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..4 {
            let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            orthogonalize(&mut v, basis, deflate);
            let nv = norm(&v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                return Some(v);
            }
        }
        None
    };

    let mut matvecs = 0;
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; dim];
        op(x, &mut y);
        y
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    let v0 = random_unit(&basis).ok_or_else(|| Error::Config("degenerate eigenproblem".into()))?;
    images.push(apply(&v0));
    matvecs += 1;
    basis.push(v0);

    let mut best = f64::INFINITY;
    loop {
        // expand the Krylov-Schur basis
        let mut exhausted = false;
        while basis.len() < kmax {
            let mut r = images.last().unwrap().clone();
            let scale = norm(&r).max(1.0);
            orthogonalize(&mut r, &basis, deflate);
            let beta = norm(&r);
            let next = if beta > 1e-10 * scale {
                r.iter_mut().for_each(|x| *x /= beta);
                Some(r)
            } else {
                random_unit(&basis)
            };
            match next {
                Some(v) => {
                    images.push(apply(&v));
                    matvecs += 1;
                    basis.push(v);
                }
                None => {
                    exhausted = true;
                    break;
                }
            }
        }

        // Rayleigh-Ritz on the current basis
        let k = basis.len();
        let mut h = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let take = keep.min(k);
        let mut ritz = Vec::with_capacity(take);
        let mut ritz_img = Vec::with_capacity(take);
        let mut values = Vec::with_capacity(take);
        let mut residuals = Vec::with_capacity(take);
        for &o in order.iter().take(take) {
            let s = eig.eigenvectors.column(o);
            let mut y = vec![0.0; dim];
            let mut ay = vec![0.0; dim];
            for j in 0..k {
                axpy(s[j], &basis[j], &mut y);
                axpy(s[j], &images[j], &mut ay);
            }
            let theta = eig.eigenvalues[o];
            let res = ay.iter().zip(&y).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
            values.push(theta);
            residuals.push(res);
            ritz.push(y);
            ritz_img.push(ay);
        }
        let worst = residuals[..nev].iter().cloned().fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= cfg.residual_tol || exhausted || k == space {
            ritz.truncate(nev);
            values.truncate(nev);
            residuals.truncate(nev);
            return Ok(EigenResult {
                values,
                vectors: ritz,
                residuals,
                matvecs,
            });
        }
        if matvecs >= cfg.max_iter {
            return Err(Error::NoConvergence {
                iterations: matvecs,
                residual: best,
            });
        }

        // continuation direction: residual of the newest basis vector
        let mut cont = images.last().unwrap().clone();
        orthogonalize(&mut cont, &basis, deflate);
        basis = ritz;
        images = ritz_img;
        orthogonalize(&mut cont, &basis, deflate);
        let nc = norm(&cont);
        let v = if nc > 1e-12 {
            cont.iter_mut().for_each(|x| *x /= nc);
            cont
        } else {
            match random_unit(&basis) {
                Some(v) => v,
                None => continue,
            }
        };
        images.push(apply(&v));
        matvecs += 1;
        basis.push(v);
    }
}

fn dense_top(aff: &LandmarkAffinity, nev: usize) -> EigenResult {
    let m = aff.m();
    let inv_sqrt: Vec<f64> = aff.dl.iter().map(|&d| if d > 0.0 { d.sqrt().recip() } else { 0.0 }).collect();
    let t = aff.trivial_vector();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for p in 0..m {
        let (c, v) = aff.w.row(p);
        for (&q, &w) in c.iter().zip(v) {
            mat[(p, q)] = inv_sqrt[p] * w * inv_sqrt[q];
        }
    }
    let mut deflated = mat.clone();
    for p in 0..m {
        for q in 0..m {
            deflated[(p, q)] -= t[p] * t[q];
        }
    }
    let eig = SymmetricEigen::new(deflated);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = EigenResult {
        values: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
        matvecs: 0,
    };
    for &o in order.iter().take(nev) {
        let v: Vec<f64> = eig.eigenvectors.column(o).iter().cloned().collect();
        let mv = &mat * nalgebra::DVector::from_column_slice(&v);
        let lambda = eig.eigenvalues[o];
        let res = mv.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        out.values.push(lambda);
        out.vectors.push(v);
        out.residuals.push(res);
    }
    out
}

/// Two leading eigenvectors of D_l^-1/2 W D_l^-1/2 after the trivial one,
/// sign-normalized so each column's largest-magnitude entry is positive.
pub fn top_nontrivial_eigenvectors(aff: &LandmarkAffinity, cfg: &EigensolverConfig) -> Result<SpectralBasis> {
    let m = aff.m();
    if m < 3 {
        return Err(Error::Config(format!("spectral init needs at least 3 landmarks, have {m}")));
    }
    if cfg.residual_tol <= 0.0 {
        return Err(Error::Config("eigensolver residual tolerance must be positive".into()));
    }
    let (res, path) = if m <= cfg.dense_threshold {
        (dense_top(aff, 2), SolverPath::Dense)
    } else {
        let t = aff.trivial_vector();
        let r = lanczos_top(|x, y| aff.apply_normalized(x, y), m, &t, 2, cfg)?;
        (r, SolverPath::Lanczos)
    };
    let mut vecs = res.vectors;
    for v in &mut vecs {
        fix_sign(v);
    }
    let u = (0..m).map(|p| [vecs[0][p], vecs[1][p]]).collect();
    Ok(SpectralBasis {
        u,
        eigenvalues: [res.values[0], res.values[1]],
        residuals: [res.residuals[0], res.residuals[1]],
        matvecs: res.matvecs,
        path,
    })
}
