use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::HeadRole;

/// Low-dimensional similarity 1 / (1 + a d^(2b)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub a: f64,
    pub b: f64,
}

impl Kernel {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Config(format!("kernel parameters must be positive (a={a}, b={b})")));
        }
        Ok(Self { a, b })
    }

    #[inline]
    pub fn phi(&self, d: f64) -> f64 {
        phi(d, self.a, self.b)
    }
}

/// Kernel pair indexed by the role of the vertex being updated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub data: Kernel,
    pub landmark: Kernel,
}

impl KernelParams {
    pub fn homogeneous(k: Kernel) -> Self {
        Self { data: k, landmark: k }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.data == self.landmark
    }

    #[inline]
    pub fn for_role(&self, role: HeadRole) -> Kernel {
        match role {
            HeadRole::Data => self.data,
            HeadRole::Landmark => self.landmark,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceMode {
    Hetero,
    Homo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub force_mode: ForceMode,
    pub min_dist_data: f64,
    pub min_dist_landmark: f64,
    pub spread: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            force_mode: ForceMode::Hetero,
            min_dist_data: 0.1,
            min_dist_landmark: 0.2,
            spread: 1.0,
        }
    }
}

impl KernelConfig {
    /// Fit both role kernels. Homo mode uses the data-role fit for both.
    pub fn resolve(&self) -> Result<KernelParams> {
        let data = fit_kernel_params(self.min_dist_data, self.spread)?;
        match self.force_mode {
            ForceMode::Homo => Ok(KernelParams::homogeneous(data)),
            ForceMode::Hetero => Ok(KernelParams {
                data,
                landmark: fit_kernel_params(self.min_dist_landmark, self.spread)?,
            }),
        }
    }
}

#[inline]
pub fn phi(d: f64, a: f64, b: f64) -> f64 {
    1.0 / (1.0 + a * d.powf(2.0 * b))
}

/// Levenberg-Marquardt least-squares fit of (a, b) so that phi follows
/// 1 for d < min_dist and exp(-(d - min_dist) / spread) beyond, on 300
/// evenly spaced points over [0, 3 spread].
pub fn fit_kernel_params(min_dist: f64, spread: f64) -> Result<Kernel> {
    if !(min_dist >= 0.0 && spread > 0.0 && min_dist < 10.0 * spread) {
        return Err(Error::Config(format!(
            "need 0 <= min_dist < 10 spread (min_dist={min_dist}, spread={spread})"
        )));
    }
    let grid: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let target: Vec<f64> = grid
        .iter()
        .map(|&d| if d < min_dist { 1.0 } else { (-(d - min_dist) / spread).exp() })
        .collect();

    let cost = |a: f64, b: f64| -> f64 {
        grid.iter()
            .zip(&target)
            .map(|(&d, &t)| (phi(d, a, b) - t).powi(2))
            .sum()
    };

    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut lambda = 1e-3;
    let mut current = cost(a, b);
    for _ in 0..1000 {
        let mut jtj = Matrix2::<f64>::zeros();
        let mut jtr = Vector2::<f64>::zeros();
        for (&d, &t) in grid.iter().zip(&target) {
            if d <= 0.0 {
                continue;
            }
            let p = d.powf(2.0 * b);
            let denom = 1.0 + a * p;
            let f = 1.0 / denom;
            let da = -p / (denom * denom);
            let db = -a * p * 2.0 * d.ln() / (denom * denom);
            let j = Vector2::new(da, db);
            jtj += j * j.transpose();
            jtr += j * (t - f);
        }
        let mut improved = false;
        for _ in 0..50 {
            let mut damped = jtj;
            damped[(0, 0)] *= 1.0 + lambda;
            damped[(1, 1)] *= 1.0 + lambda;
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let (na, nb) = (a + step[0], b + step[1]);
            if na > 0.0 && nb > 0.0 {
                let c = cost(na, nb);
                if c < current {
                    let rel = (step[0] / a).abs().max((step[1] / b).abs());
                    a = na;
                    b = nb;
                    current = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    if rel < 1e-12 {
                        return Kernel::new(a, b);
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            // no descent direction left: at the minimum up to rounding
            return Kernel::new(a, b);
        }
    }
    Err(Error::CurveFit(format!(
        "no convergence for min_dist={min_dist}, spread={spread}"
    )))
}

/// Attractive update direction for the head of a positive edge:
/// -(2ab |delta|^(2b-2) / (1 + a |delta|^(2b))) delta, with delta = zu - zv.
#[inline]
pub fn attractive_gradient(zu: [f64; 2], zv: [f64; 2], k: Kernel) -> [f64; 2] {
    let dx = zu[0] - zv[0];
    let dy = zu[1] - zv[1];
    let d2 = dx * dx + dy * dy;
    if d2 <= 0.0 {
        return [0.0, 0.0];
    }
    let pb = d2.powf(k.b);
    let coeff = -2.0 * k.a * k.b * pb / d2 / (1.0 + k.a * pb);
    [coeff * dx, coeff * dy]
}

/// Repulsive update direction for the head against one negative sample, the
/// descent direction of -log(1 - phi): 2b delta / ((eps + |delta|^2)(1 + a |delta|^(2b))).
#[inline]
pub fn repulsive_gradient(zu: [f64; 2], zn: [f64; 2], k: Kernel, eps: f64) -> [f64; 2] {
    let dx = zu[0] - zn[0];
    let dy = zu[1] - zn[1];
    let d2 = dx * dx + dy * dy;
    if d2 <= 0.0 {
        return [0.0, 0.0];
    }
    let coeff = 2.0 * k.b / ((eps + d2) * (1.0 + k.a * d2.powf(k.b)));
    [coeff * dx, coeff * dy]
}

#[inline]
pub fn clip(g: [f64; 2], limit: f64) -> [f64; 2] {
    [g[0].clamp(-limit, limit), g[1].clamp(-limit, limit)]
}
