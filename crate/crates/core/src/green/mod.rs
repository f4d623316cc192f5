//! Dirichlet Green's functions of balls, their regular parts and Robin
//! functions, with surface-integral identity checks.
//!
//! Convention: `G(x,y) = γ_n |x-y|^{2-n} - H(x,y)` with `H` the positive
//! regular part and `τ(x) = H(x,x)`.

mod identities;
mod sphere;

pub use identities::{
    bilinear_pohozaev_check, grad_checks, i_closed_form, i_integral, jk_closed_form, jk_integrals,
    jk_tables, robin_identities_check, GradCheckReport, JkTables, PohozaevCheck, Polynomial2,
    RobinReport, TestField,
};
pub use sphere::{sphere_quadrature, Ring, SphereRule};

use crate::numerics::sphere_area;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("unsupported dimension {0} for surface quadrature (supported: 3, 4, 5)")]
    UnsupportedDimension(usize),
    #[error("point is within {dist:e} of the boundary, below the limit {limit:e}")]
    TooCloseToBoundary { dist: f64, limit: f64 },
    #[error("sphere of radius {r} around point {i} meets point {j}")]
    SphereMeetsPoint { i: usize, j: usize, r: f64 },
    #[error("sphere of radius {r} around point {i} leaves the domain")]
    SphereLeavesDomain { i: usize, r: f64 },
    #[error("index {0} out of range")]
    Index(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// `γ_n = 1/((n-2)|S^{n-1}|)`.
pub fn gamma_n(n: usize) -> f64 {
    1.0 / ((n as f64 - 2.0) * sphere_area(n))
}

/// The domain carried by an oracle. Only balls ship.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        self.radius - dist(x, &self.center)
    }
}

/// Green's function evaluator. Matrix outputs are `n*n` row-major buffers.
pub trait GreenOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> Ball;
    fn g(&self, x: &[f64], y: &[f64]) -> f64;
    fn h(&self, x: &[f64], y: &[f64]) -> f64;
    fn tau(&self, x: &[f64]) -> f64;
    /// `∇_x G(x,y)`.
    fn grad_x_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]);
    /// `∂²G/∂x_k∂x_q`, entry `k*n+q`.
    fn hess_xx_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]);
    /// `∂²G/∂x_k∂y_q`, entry `k*n+q`.
    fn hess_xy_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]);
    fn grad_tau_into(&self, x: &[f64], out: &mut [f64]);
    fn hess_tau_into(&self, x: &[f64], out: &mut [f64]);

    /// `∇_x G(x,y)` and `∇_y (ν·∇_x G)(x,y)` at many `x` with directions `ν`,
    /// all stored by coordinate (`x[k][i]`). Boundary quadratures need both
    /// at every node.
    fn grad_and_normal_mixed_batch(
        &self,
        x: &[Vec<f64>],
        y: &[f64],
        nu: &[Vec<f64>],
        grad: &mut [Vec<f64>],
        mixed: &mut [Vec<f64>],
    ) {
        let n = self.dim();
        let mut xi = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n * n];
        for i in 0..x[0].len() {
            for k in 0..n {
                xi[k] = x[k][i];
            }
            self.grad_x_g_into(&xi, y, &mut g);
            self.hess_xy_g_into(&xi, y, &mut h);
            for l in 0..n {
                grad[l][i] = g[l];
                mixed[l][i] = (0..n).map(|k| nu[k][i] * h[k * n + l]).sum();
            }
        }
    }

    fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        self.domain().distance_to_boundary(x)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.distance_to_boundary(x) > 0.0
    }

    fn grad_x_g(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.grad_x_g_into(x, y, &mut out);
        out
    }

    /// `∇_y G(x,y)`, from symmetry of `G`.
    fn grad_y_g(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.grad_x_g(y, x)
    }

    fn hess_xx_g(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        self.hess_xx_g_into(x, y, &mut out);
        out
    }

    fn hess_xy_g(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        self.hess_xy_g_into(x, y, &mut out);
        out
    }

    fn grad_tau(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.grad_tau_into(x, &mut out);
        out
    }

    fn hess_tau(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        self.hess_tau_into(x, &mut out);
        out
    }
}

/// Serializable choice of oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleSpec {
    UnitBall {},
    ScaledBall { center: Vec<f64>, radius: f64 },
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec::UnitBall {}
    }
}

impl OracleSpec {
    pub fn build(&self, n: usize) -> Result<Box<dyn GreenOracle>, GreenError> {
        if n < 3 {
            return Err(GreenError::UnsupportedDimension(n));
        }
        match self {
            OracleSpec::UnitBall {} => Ok(Box::new(UnitBallOracle::new(n))),
            OracleSpec::ScaledBall { center, radius } => {
                if center.len() != n {
                    return Err(GreenError::Dimension {
                        expected: n,
                        got: center.len(),
                    });
                }
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(GreenError::InvalidRadius(*radius));
                }
                Ok(Box::new(ScaledBallOracle::new(center.clone(), *radius)))
            }
        }
    }
}

/// Green's function of the unit ball by the method of images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitBallOracle {
    n: usize,
    gamma: f64,
}

impl UnitBallOracle {
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "dimension must be at least 3");
        UnitBallOracle {
            n,
            gamma: gamma_n(n),
        }
    }

    /// `s(x,y) = |x|²|y|² - 2x·y + 1`.
    fn s(x: &[f64], y: &[f64]) -> f64 {
        norm2(x) * norm2(y) - 2.0 * dot(x, y) + 1.0
    }
}

impl GreenOracle for UnitBallOracle {
    fn dim(&self) -> usize {
        self.n
    }

    fn domain(&self) -> Ball {
        Ball {
            center: vec![0.0; self.n],
            radius: 1.0,
        }
    }

    fn g(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.n as f64;
        self.gamma * dist2(x, y).powf(1.0 - 0.5 * n) - self.h(x, y)
    }

    fn h(&self, x: &[f64], y: &[f64]) -> f64 {
        let a = 0.5 * (self.n as f64 - 2.0);
        self.gamma * Self::s(x, y).powf(-a)
    }

    fn tau(&self, x: &[f64]) -> f64 {
        self.gamma * (1.0 - norm2(x)).powf(2.0 - self.n as f64)
    }

    fn grad_x_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let nf = n as f64;
        let a = 0.5 * (nf - 2.0);
        let d2 = dist2(x, y);
        let phi = -(nf - 2.0) * self.gamma * inv_half_power(d2, n);
        let s = Self::s(x, y);
        let hs = -a * self.gamma * inv_half_power(s, n);
        let y2 = norm2(y);
        for k in 0..n {
            let sx = 2.0 * y2 * x[k] - 2.0 * y[k];
            out[k] = phi * (x[k] - y[k]) - hs * sx;
        }
    }

    fn hess_xx_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let nf = n as f64;
        let a = 0.5 * (nf - 2.0);
        let d2 = dist2(x, y);
        let dp = inv_half_power(d2, n);
        let c0 = -(nf - 2.0) * self.gamma * dp;
        let c1 = (nf - 2.0) * self.gamma * nf * dp / d2;
        let s = Self::s(x, y);
        let sp = inv_half_power(s, n);
        let h2 = self.gamma * a * (a + 1.0) * sp / s;
        let h1 = self.gamma * a * sp;
        let y2 = norm2(y);
        for k in 0..n {
            let sxk = 2.0 * y2 * x[k] - 2.0 * y[k];
            for q in 0..n {
                let sxq = 2.0 * y2 * x[q] - 2.0 * y[q];
                let delta = if k == q { 1.0 } else { 0.0 };
                let phi = c0 * delta + c1 * (x[k] - y[k]) * (x[q] - y[q]);
                let hh = h2 * sxk * sxq - h1 * 2.0 * y2 * delta;
                out[k * n + q] = phi - hh;
            }
        }
    }

    fn hess_xy_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let nf = n as f64;
        let a = 0.5 * (nf - 2.0);
        let d2 = dist2(x, y);
        let dp = inv_half_power(d2, n);
        let c0 = -(nf - 2.0) * self.gamma * dp;
        let c1 = (nf - 2.0) * self.gamma * nf * dp / d2;
        let s = Self::s(x, y);
        let sp = inv_half_power(s, n);
        let h2 = self.gamma * a * (a + 1.0) * sp / s;
        let h1 = self.gamma * a * sp;
        let x2 = norm2(x);
        let y2 = norm2(y);
        for k in 0..n {
            let sxk = 2.0 * y2 * x[k] - 2.0 * y[k];
            for q in 0..n {
                let syq = 2.0 * x2 * y[q] - 2.0 * x[q];
                let delta = if k == q { 1.0 } else { 0.0 };
                let phi = -(c0 * delta + c1 * (x[k] - y[k]) * (x[q] - y[q]));
                let sxy = 4.0 * x[k] * y[q] - 2.0 * delta;
                let hh = h2 * sxk * syq - h1 * sxy;
                out[k * n + q] = phi - hh;
            }
        }
    }

    // the mixed Hessian is diagonal plus three rank-one terms, so the
    // contraction with ν costs O(n); loops run over nodes so they vectorize
    fn grad_and_normal_mixed_batch(
        &self,
        x: &[Vec<f64>],
        y: &[f64],
        nu: &[Vec<f64>],
        grad: &mut [Vec<f64>],
        mixed: &mut [Vec<f64>],
    ) {
        let n = self.n;
        let nf = n as f64;
        let a = 0.5 * (nf - 2.0);
        let m = x[0].len();
        let y2 = norm2(y);
        let mut d2 = vec![0.0; m];
        let mut x2 = vec![0.0; m];
        let mut xy = vec![0.0; m];
        for k in 0..n {
            let (xk, yk) = (&x[k][..m], y[k]);
            for i in 0..m {
                let d = xk[i] - yk;
                d2[i] += d * d;
                x2[i] += xk[i] * xk[i];
                xy[i] += xk[i] * yk;
            }
        }
        // reuse the buffers: d2 -> c0, xy -> h1, and c1, h2 alongside
        let mut c1 = vec![0.0; m];
        let mut h2 = vec![0.0; m];
        for i in 0..m {
            let inv_d2 = 1.0 / d2[i];
            let dp = half_power_of_inverse(inv_d2, n);
            let inv_s = 1.0 / (x2[i] * y2 - 2.0 * xy[i] + 1.0);
            let h1 = self.gamma * a * half_power_of_inverse(inv_s, n);
            d2[i] = -(nf - 2.0) * self.gamma * dp;
            c1[i] = (nf - 2.0) * self.gamma * nf * dp * inv_d2;
            xy[i] = h1;
            h2[i] = h1 * (a + 1.0) * inv_s;
        }
        let (c0, h1) = (d2, xy);
        let mut nu_d = vec![0.0; m];
        let mut nu_sx = vec![0.0; m];
        let mut nu_x = vec![0.0; m];
        for k in 0..n {
            let (xk, nk, yk) = (&x[k][..m], &nu[k][..m], y[k]);
            let gk = &mut grad[k][..m];
            for i in 0..m {
                let dk = xk[i] - yk;
                let sxk = 2.0 * y2 * xk[i] - 2.0 * yk;
                gk[i] = c0[i] * dk + h1[i] * sxk;
                nu_d[i] += nk[i] * dk;
                nu_sx[i] += nk[i] * sxk;
                nu_x[i] += nk[i] * xk[i];
            }
        }
        // ∇_y(ν·∇_x G) = A x + B y + D ν
        for i in 0..m {
            let ca = -c1[i] * nu_d[i] + 2.0 * h2[i] * nu_sx[i];
            let cb = c1[i] * nu_d[i] - 2.0 * x2[i] * h2[i] * nu_sx[i] + 4.0 * h1[i] * nu_x[i];
            nu_d[i] = ca;
            nu_sx[i] = cb;
            nu_x[i] = -c0[i] - 2.0 * h1[i];
        }
        let (ca, cb, diag) = (nu_d, nu_sx, nu_x);
        for k in 0..n {
            let (xk, nk, yk) = (&x[k][..m], &nu[k][..m], y[k]);
            let mk = &mut mixed[k][..m];
            for i in 0..m {
                mk[i] = ca[i] * xk[i] + cb[i] * yk + diag[i] * nk[i];
            }
        }
    }

    fn grad_tau_into(&self, x: &[f64], out: &mut [f64]) {
        let nf = self.n as f64;
        let c = 2.0 * (nf - 2.0) * self.gamma * (1.0 - norm2(x)).powf(1.0 - nf);
        for k in 0..self.n {
            out[k] = c * x[k];
        }
    }

    fn hess_tau_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let nf = n as f64;
        let w = 1.0 - norm2(x);
        let c0 = 2.0 * (nf - 2.0) * self.gamma * w.powf(1.0 - nf);
        let c1 = 4.0 * (nf - 2.0) * (nf - 1.0) * self.gamma * w.powf(-nf);
        for k in 0..n {
            for q in 0..n {
                let delta = if k == q { 1.0 } else { 0.0 };
                out[k * n + q] = c0 * delta + c1 * x[k] * x[q];
            }
        }
    }
}

/// Ball of radius `R` around `c`: `G_R(x,y) = R^{2-n} G_1((x-c)/R, (y-c)/R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledBallOracle {
    center: Vec<f64>,
    radius: f64,
    inner: UnitBallOracle,
}

impl ScaledBallOracle {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0, "radius must be positive");
        let n = center.len();
        ScaledBallOracle {
            center,
            radius,
            inner: UnitBallOracle::new(n),
        }
    }

    fn map(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) / self.radius)
            .collect()
    }

    fn scale(&self, power: f64) -> f64 {
        self.radius.powf(power)
    }
}

impl GreenOracle for ScaledBallOracle {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn domain(&self) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius,
        }
    }

    fn g(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim() as f64;
        self.scale(2.0 - n) * self.inner.g(&self.map(x), &self.map(y))
    }

    fn h(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim() as f64;
        self.scale(2.0 - n) * self.inner.h(&self.map(x), &self.map(y))
    }

    fn tau(&self, x: &[f64]) -> f64 {
        let n = self.dim() as f64;
        self.scale(2.0 - n) * self.inner.tau(&self.map(x))
    }

    fn grad_x_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.dim() as f64;
        self.inner.grad_x_g_into(&self.map(x), &self.map(y), out);
        let c = self.scale(1.0 - n);
        out.iter_mut().for_each(|v| *v *= c);
    }

    fn hess_xx_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.dim() as f64;
        self.inner.hess_xx_g_into(&self.map(x), &self.map(y), out);
        let c = self.scale(-n);
        out.iter_mut().for_each(|v| *v *= c);
    }

    fn hess_xy_g_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.dim() as f64;
        self.inner.hess_xy_g_into(&self.map(x), &self.map(y), out);
        let c = self.scale(-n);
        out.iter_mut().for_each(|v| *v *= c);
    }

    fn grad_tau_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim() as f64;
        self.inner.grad_tau_into(&self.map(x), out);
        let c = self.scale(1.0 - n);
        out.iter_mut().for_each(|v| *v *= c);
    }

    fn hess_tau_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim() as f64;
        self.inner.hess_tau_into(&self.map(x), out);
        let c = self.scale(-n);
        out.iter_mut().for_each(|v| *v *= c);
    }
}

/// `v^{-n/2}` without `powf`; the kernels are evaluated millions of times.
fn inv_half_power(v: f64, n: usize) -> f64 {
    let p = v.powi(-((n / 2) as i32));
    if n % 2 == 1 {
        p / v.sqrt()
    } else {
        p
    }
}

/// `v^{n/2}` for `v = 1/w`, so callers divide once per base.
fn half_power_of_inverse(v: f64, n: usize) -> f64 {
    let mut p = if n % 2 == 1 { v.sqrt() } else { 1.0 };
    for _ in 0..n / 2 {
        p *= v;
    }
    p
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gamma_three() {
        assert_relative_eq!(gamma_n(3), 1.0 / (4.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn batched_kernel_matches_full_hessian() {
        for n in 3..=5 {
            let o = UnitBallOracle::new(n);
            let m = 7;
            let x: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    (0..m)
                        .map(|i| 0.9 * (k as f64 + 1.3 * i as f64).sin() / (n as f64).sqrt())
                        .collect()
                })
                .collect();
            let nu: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    (0..m)
                        .map(|i| (0.7 * k as f64 + 0.2 * i as f64).cos())
                        .collect()
                })
                .collect();
            let y: Vec<f64> = (0..n)
                .map(|k| 0.3 * (2.0 * k as f64).cos() / (n as f64).sqrt())
                .collect();
            let mut g = vec![vec![0.0; m]; n];
            let mut mx = vec![vec![0.0; m]; n];
            o.grad_and_normal_mixed_batch(&x, &y, &nu, &mut g, &mut mx);
            let mut g_ref = g.clone();
            let mut mx_ref = mx.clone();
            // the trait's default goes through the full Hessian
            struct Plain(UnitBallOracle);
            impl GreenOracle for Plain {
                fn dim(&self) -> usize {
                    self.0.dim()
                }
                fn domain(&self) -> Ball {
                    self.0.domain()
                }
                fn g(&self, x: &[f64], y: &[f64]) -> f64 {
                    self.0.g(x, y)
                }
                fn h(&self, x: &[f64], y: &[f64]) -> f64 {
                    self.0.h(x, y)
                }
                fn tau(&self, x: &[f64]) -> f64 {
                    self.0.tau(x)
                }
                fn grad_x_g_into(&self, x: &[f64], y: &[f64], o: &mut [f64]) {
                    self.0.grad_x_g_into(x, y, o)
                }
                fn hess_xx_g_into(&self, x: &[f64], y: &[f64], o: &mut [f64]) {
                    self.0.hess_xx_g_into(x, y, o)
                }
                fn hess_xy_g_into(&self, x: &[f64], y: &[f64], o: &mut [f64]) {
                    self.0.hess_xy_g_into(x, y, o)
                }
                fn grad_tau_into(&self, x: &[f64], o: &mut [f64]) {
                    self.0.grad_tau_into(x, o)
                }
                fn hess_tau_into(&self, x: &[f64], o: &mut [f64]) {
                    self.0.hess_tau_into(x, o)
                }
            }
            Plain(o).grad_and_normal_mixed_batch(&x, &y, &nu, &mut g_ref, &mut mx_ref);
            for k in 0..n {
                for i in 0..m {
                    assert_relative_eq!(g[k][i], g_ref[k][i], max_relative = 1e-13);
                    let scale = mx_ref.iter().fold(0.0f64, |acc, r| acc.max(r[i].abs()));
                    assert!(
                        (mx[k][i] - mx_ref[k][i]).abs() <= 1e-13 * scale,
                        "n={n} k={k} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn regular_part_decomposition() {
        let o = UnitBallOracle::new(4);
        let x = [0.1, 0.2, -0.3, 0.05];
        let y = [-0.4, 0.1, 0.2, 0.0];
        let lhs = o.h(&x, &y);
        let rhs = gamma_n(4) * dist2(&x, &y).powf(-1.0) - o.g(&x, &y);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
        assert_relative_eq!(o.g(&x, &y), o.g(&y, &x), max_relative = 1e-14);
        assert!(o.g(&x, &y) > 0.0);
    }

    #[test]
    fn tau_matches_diagonal_of_h() {
        let o = UnitBallOracle::new(5);
        let x = [0.3, -0.2, 0.1, 0.0, 0.4];
        assert_relative_eq!(o.tau(&x), o.h(&x, &x), max_relative = 1e-14);
        assert_relative_eq!(o.tau(&[0.0; 5]), gamma_n(5), max_relative = 1e-15);
    }

    #[test]
    fn vanishes_on_boundary() {
        let o = UnitBallOracle::new(3);
        let y = [0.2, 0.3, -0.1];
        let x = [0.6, 0.0, 0.8];
        assert!(o.g(&x, &y).abs() < 1e-14);
    }

    #[test]
    fn scaled_ball_consistency() {
        let o = ScaledBallOracle::new(vec![1.0, -2.0, 0.5], 2.5);
        let x = [1.3, -1.5, 0.0];
        let y = [0.2, -2.4, 1.1];
        let u = UnitBallOracle::new(3);
        let xm: Vec<f64> = o.map(&x);
        let ym: Vec<f64> = o.map(&y);
        assert_relative_eq!(o.g(&x, &y), u.g(&xm, &ym) / 2.5, max_relative = 1e-14);
        assert_relative_eq!(o.tau(&x), o.h(&x, &x), max_relative = 1e-14);
        let boundary = [1.0, -2.0, 3.0];
        assert!(o.g(&boundary, &y).abs() < 1e-14);
    }

    #[test]
    fn hessian_of_tau_at_center() {
        let o = UnitBallOracle::new(4);
        let h = o.hess_tau(&[0.0; 4]);
        for k in 0..4 {
            for q in 0..4 {
                let e = if k == q { 2.0 * 2.0 * gamma_n(4) } else { 0.0 };
                assert!((h[k * 4 + q] - e).abs() < 1e-15);
            }
        }
        assert!(o.grad_tau(&[0.0; 4]).iter().all(|v| *v == 0.0));
    }
}
