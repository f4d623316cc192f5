use super::sphere::sphere_quadrature;
use super::{dist, GreenError, GreenOracle};
use crate::numerics::gauss_legendre;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinReport {
    pub x0: Vec<f64>,
    pub order: usize,
    /// `∫(x-x0,ν)(∂_νG)²` and `(n-2)τ(x0)`.
    pub first_lhs: f64,
    pub first_rhs: f64,
    /// `∫(∂_νG)²ν_k` and `∂_kτ(x0)`.
    pub second_lhs: Vec<f64>,
    pub second_rhs: Vec<f64>,
    /// `∫∂_{x_k}G ∂_{y_l}∂_νG` and `½∂²_{kl}τ(x0)`, row-major.
    pub third_lhs: Vec<f64>,
    pub third_rhs: Vec<f64>,
    pub residuals: [f64; 3],
}

impl RobinReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Dot product with four independent partial sums, so it pipelines.
fn lane_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for j in 0..4 {
            acc[j] += x[j] * y[j];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn l2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Boundary-quadrature check of the three Robin-function identities at `x0`.
///
/// Residuals are relative to `max(|rhs|, τ(x0)/R^k)` where `k` is the
/// number of derivatives in the identity.
pub fn robin_identities_check(
    oracle: &dyn GreenOracle,
    x0: &[f64],
    order: usize,
) -> Result<RobinReport, GreenError> {
    let n = oracle.dim();
    if x0.len() != n {
        return Err(GreenError::Dimension {
            expected: n,
            got: x0.len(),
        });
    }
    let ball = oracle.domain();
    let d = ball.distance_to_boundary(x0);
    let limit = 0.05 * ball.radius;
    if d < limit {
        return Err(GreenError::TooCloseToBoundary { dist: d, limit });
    }
    let rule = sphere_quadrature(n, &ball.center, ball.radius, order)?;
    let mut first = 0.0;
    let mut second = vec![0.0; n];
    let mut third = vec![0.0; n * n];
    let m = rule.ring_len();
    let mut grad = vec![vec![0.0; m]; n];
    let mut dnu_dy = vec![vec![0.0; m]; n];
    let mut dnu = vec![0.0; m];
    let mut proj = vec![0.0; m];
    rule.for_each_ring(|ring| {
        let (x, nu, w) = (&ring.points, &ring.normals, ring.weight);
        oracle.grad_and_normal_mixed_batch(x, x0, nu, &mut grad, &mut dnu_dy);
        dnu.fill(0.0);
        proj.fill(0.0);
        for k in 0..n {
            let c = x0[k];
            let rows = grad[k].iter().zip(&nu[k]).zip(&x[k]);
            for ((d, p), ((g, v), xk)) in dnu.iter_mut().zip(proj.iter_mut()).zip(rows) {
                *d += g * v;
                *p += (xk - c) * v;
            }
        }
        for d in dnu.iter_mut() {
            *d *= *d;
        }
        first += w * lane_dot(&proj, &dnu);
        for k in 0..n {
            second[k] += w * lane_dot(&dnu, &nu[k]);
            for l in 0..n {
                third[k * n + l] += w * lane_dot(&grad[k], &dnu_dy[l]);
            }
        }
    });
    let tau = oracle.tau(x0);
    let first_rhs = (n as f64 - 2.0) * tau;
    let second_rhs = oracle.grad_tau(x0);
    let third_rhs: Vec<f64> = oracle.hess_tau(x0).iter().map(|v| 0.5 * v).collect();
    let r = ball.radius;
    let residuals = [
        (first - first_rhs).abs() / first_rhs.abs(),
        diff_norm(&second, &second_rhs) / l2(&second_rhs).max(tau / r),
        diff_norm(&third, &third_rhs) / l2(&third_rhs).max(tau / (r * r)),
    ];
    Ok(RobinReport {
        x0: x0.to_vec(),
        order,
        first_lhs: first,
        first_rhs,
        second_lhs: second,
        second_rhs,
        third_lhs: third,
        third_rhs,
        residuals,
    })
}

fn check_sphere(
    oracle: &dyn GreenOracle,
    indices: &[usize],
    i: usize,
    points: &[Vec<f64>],
    r: f64,
) -> Result<(), GreenError> {
    for &k in indices {
        if k >= points.len() {
            return Err(GreenError::Index(k));
        }
    }
    let n = oracle.dim();
    for p in points {
        if p.len() != n {
            return Err(GreenError::Dimension {
                expected: n,
                got: p.len(),
            });
        }
    }
    for (j, p) in points.iter().enumerate() {
        if j != i && dist(p, &points[i]) <= r {
            return Err(GreenError::SphereMeetsPoint { i, j, r });
        }
    }
    if oracle.distance_to_boundary(&points[i]) <= r {
        return Err(GreenError::SphereLeavesDomain { i, r });
    }
    Ok(())
}

/// Surface integral `I_{jl}` over `∂B(x_i, r)`.
#[allow(clippy::too_many_arguments)]
pub fn i_integral(
    oracle: &dyn GreenOracle,
    i: usize,
    j: usize,
    l: usize,
    points: &[Vec<f64>],
    r: f64,
    order: usize,
) -> Result<f64, GreenError> {
    check_sphere(oracle, &[i, j, l], i, points, r)?;
    let n = oracle.dim();
    let a = 0.5 * (n as f64 - 2.0);
    let xi = &points[i];
    let xj = &points[j];
    let xl = &points[l];
    let rule = sphere_quadrature(n, xi, r, order)?;
    let mut gj = vec![0.0; n];
    let mut hj = vec![0.0; n * n];
    let mut gl = vec![0.0; n];
    Ok(rule.integrate(|x, nu| {
        oracle.grad_x_g_into(x, xj, &mut gj);
        oracle.hess_xx_g_into(x, xj, &mut hj);
        oracle.grad_x_g_into(x, xl, &mut gl);
        let f: f64 = (0..n).map(|k| (x[k] - xi[k]) * gj[k]).sum::<f64>() + a * oracle.g(x, xj);
        let mut dnu_f = 0.0;
        for m in 0..n {
            let mut grad_f = (1.0 + a) * gj[m];
            for k in 0..n {
                grad_f += hj[m * n + k] * (x[k] - xi[k]);
            }
            dnu_f += nu[m] * grad_f;
        }
        let dnu_gl: f64 = (0..n).map(|m| nu[m] * gl[m]).sum();
        dnu_f * oracle.g(x, xl) - f * dnu_gl
    }))
}

/// Limiting values of `I_{jl}`.
pub fn i_closed_form(
    oracle: &dyn GreenOracle,
    i: usize,
    j: usize,
    l: usize,
    points: &[Vec<f64>],
) -> f64 {
    let a = 0.5 * (oracle.dim() as f64 - 2.0);
    match (j == i, l == i) {
        (false, false) => 0.0,
        (false, true) => a * oracle.g(&points[i], &points[j]),
        (true, false) => a * oracle.g(&points[i], &points[l]),
        (true, true) => -2.0 * a * oracle.tau(&points[i]),
    }
}

/// Surface integrals `(J_{jl}, K_{jl})` over `∂B(x_i, r)` for the
/// derivative directions `k` and `q`.
#[allow(clippy::too_many_arguments)]
pub fn jk_integrals(
    oracle: &dyn GreenOracle,
    i: usize,
    j: usize,
    l: usize,
    k: usize,
    q: usize,
    points: &[Vec<f64>],
    r: f64,
    order: usize,
) -> Result<(f64, f64), GreenError> {
    let n = oracle.dim();
    if k >= n || q >= n {
        return Err(GreenError::Index(k.max(q)));
    }
    let t = jk_tables(oracle, i, j, l, points, r, order)?;
    Ok((t.j[k], t.k[k * n + q]))
}

/// `J_{jl}` for every direction `k` and `K_{jl}` for every pair `(k, q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JkTables {
    pub j: Vec<f64>,
    /// Row-major in `(k, q)`.
    pub k: Vec<f64>,
}

/// All `(J, K)` entries for the index triple in one surface pass.
pub fn jk_tables(
    oracle: &dyn GreenOracle,
    i: usize,
    j: usize,
    l: usize,
    points: &[Vec<f64>],
    r: f64,
    order: usize,
) -> Result<JkTables, GreenError> {
    check_sphere(oracle, &[i, j, l], i, points, r)?;
    let n = oracle.dim();
    let xi = &points[i];
    let xj = &points[j];
    let xl = &points[l];
    let rule = sphere_quadrature(n, xi, r, order)?;
    let mut gj = vec![0.0; n];
    let mut hj = vec![0.0; n * n];
    let mut gl = vec![0.0; n];
    let mut gyl = vec![0.0; n];
    let mut hl = vec![0.0; n * n];
    let mut dnu_dk_gj = vec![0.0; n];
    let mut dnu_dyq_gl = vec![0.0; n];
    let mut jt = vec![0.0; n];
    let mut kt = vec![0.0; n * n];
    rule.for_each(|x, nu, w| {
        oracle.grad_x_g_into(x, xj, &mut gj);
        oracle.hess_xx_g_into(x, xj, &mut hj);
        oracle.grad_x_g_into(x, xl, &mut gl);
        oracle.grad_x_g_into(xl, x, &mut gyl);
        oracle.hess_xy_g_into(x, xl, &mut hl);
        let g_l = oracle.g(x, xl);
        let dnu_gl: f64 = (0..n).map(|m| nu[m] * gl[m]).sum();
        for a in 0..n {
            dnu_dk_gj[a] = (0..n).map(|m| nu[m] * hj[m * n + a]).sum();
            dnu_dyq_gl[a] = (0..n).map(|m| nu[m] * hl[m * n + a]).sum();
        }
        for k in 0..n {
            jt[k] += w * (dnu_dk_gj[k] * g_l - gj[k] * dnu_gl);
            for q in 0..n {
                kt[k * n + q] += w * (dnu_dk_gj[k] * gyl[q] - gj[k] * dnu_dyq_gl[q]);
            }
        }
    });
    Ok(JkTables { j: jt, k: kt })
}

/// Limiting values of `(J_{jl}, K_{jl})`.
#[allow(clippy::too_many_arguments)]
pub fn jk_closed_form(
    oracle: &dyn GreenOracle,
    i: usize,
    j: usize,
    l: usize,
    k: usize,
    q: usize,
    points: &[Vec<f64>],
) -> (f64, f64) {
    let n = oracle.dim();
    let xi = &points[i];
    match (j == i, l == i) {
        (false, false) => (0.0, 0.0),
        (true, false) => (
            oracle.grad_x_g(xi, &points[l])[k],
            oracle.hess_xy_g(xi, &points[l])[k * n + q],
        ),
        (false, true) => (
            oracle.grad_x_g(xi, &points[j])[k],
            oracle.hess_xx_g(xi, &points[j])[k * n + q],
        ),
        (true, true) => (
            -oracle.grad_tau(xi)[k],
            -0.5 * oracle.hess_tau(xi)[k * n + q],
        ),
    }
}

/// A smooth field with gradient and Laplacian.
pub trait TestField {
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn laplacian(&self, x: &[f64]) -> f64;
}

/// `c + b·x + xᵀAx` with symmetric `A` (row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial2 {
    pub c: f64,
    pub b: Vec<f64>,
    pub a: Vec<f64>,
}

impl Polynomial2 {
    pub fn new(c: f64, b: Vec<f64>, a: Vec<f64>) -> Self {
        let n = b.len();
        assert_eq!(a.len(), n * n);
        let mut sym = a.clone();
        for i in 0..n {
            for j in 0..n {
                sym[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
            }
        }
        Polynomial2 { c, b, a: sym }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.b.len();
        let mut v = self.c;
        for i in 0..n {
            v += self.b[i] * x[i];
            for j in 0..n {
                v += x[i] * self.a[i * n + j] * x[j];
            }
        }
        v
    }
}

impl TestField for Polynomial2 {
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.b.len();
        (0..n)
            .map(|i| self.b[i] + 2.0 * (0..n).map(|j| self.a[i * n + j] * x[j]).sum::<f64>())
            .collect()
    }

    fn laplacian(&self, _x: &[f64]) -> f64 {
        let n = self.b.len();
        2.0 * (0..n).map(|i| self.a[i * n + i]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevCheck {
    pub lhs: f64,
    pub boundary_term: f64,
    pub volume_term: f64,
    pub residual: f64,
}

/// Both sides of the bilinear Pohožaev identity on `B(x0, r)`:
/// `∫[(x-x0)·∇f Δg + (x-x0)·∇g Δf] = r∫_∂(2∂_νf∂_νg - ∇f·∇g) + (n-2)∫∇f·∇g`.
///
/// The residual is `|lhs - rhs|` over the sum of the absolute values of the
/// three terms (zero when all vanish).
pub fn bilinear_pohozaev_check(
    f: &dyn TestField,
    g: &dyn TestField,
    x0: &[f64],
    r: f64,
    volume_order: usize,
    surface_order: usize,
) -> Result<PohozaevCheck, GreenError> {
    let n = x0.len();
    let radial = gauss_legendre(volume_order.max(1), 0.0, r);
    let mut lhs = 0.0;
    let mut volume = 0.0;
    for (&rho, &wr) in radial.nodes.iter().zip(&radial.weights) {
        let shell = sphere_quadrature(n, x0, rho, surface_order)?;
        shell.for_each(|x, _, w| {
            let gf = f.gradient(x);
            let gg = g.gradient(x);
            let xf: f64 = (0..n).map(|k| (x[k] - x0[k]) * gf[k]).sum();
            let xg: f64 = (0..n).map(|k| (x[k] - x0[k]) * gg[k]).sum();
            lhs += wr * w * (xf * g.laplacian(x) + xg * f.laplacian(x));
            volume += wr * w * (0..n).map(|k| gf[k] * gg[k]).sum::<f64>();
        });
    }
    let surface = sphere_quadrature(n, x0, r, surface_order)?;
    let boundary = r * surface.integrate(|x, nu| {
        let gf = f.gradient(x);
        let gg = g.gradient(x);
        let df: f64 = (0..n).map(|k| nu[k] * gf[k]).sum();
        let dg: f64 = (0..n).map(|k| nu[k] * gg[k]).sum();
        2.0 * df * dg - (0..n).map(|k| gf[k] * gg[k]).sum::<f64>()
    });
    let volume_term = (n as f64 - 2.0) * volume;
    let rhs = boundary + volume_term;
    let scale = lhs.abs() + boundary.abs() + volume_term.abs();
    let residual = if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    };
    Ok(PohozaevCheck {
        lhs,
        boundary_term: boundary,
        volume_term,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub grad_x: f64,
    pub grad_y: f64,
    pub hess_xx: f64,
    pub hess_xy: f64,
    pub grad_tau: f64,
    pub hess_tau: f64,
}

impl GradCheckReport {
    pub fn worst(&self) -> f64 {
        [
            self.grad_x,
            self.grad_y,
            self.hess_xx,
            self.hess_xy,
            self.grad_tau,
            self.hess_tau,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn richardson_derivative<F: FnMut(&[f64]) -> Vec<f64>>(
    mut f: F,
    x: &[f64],
    k: usize,
    h: f64,
) -> Vec<f64> {
    let mut central = |h: f64| {
        let mut xp = x.to_vec();
        xp[k] += h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        fp.iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect::<Vec<f64>>()
    };
    let d1 = central(h);
    let d2 = central(0.5 * h);
    d1.iter()
        .zip(&d2)
        .map(|(a, b)| (4.0 * b - a) / 3.0)
        .collect()
}

fn rel_dev(analytic: &[f64], fd: &[f64]) -> f64 {
    let scale = fd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = analytic
        .iter()
        .zip(fd)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}

/// Validates every analytic derivative against Richardson-extrapolated
/// central differences at the sampled `(x, y)` pairs.
pub fn grad_checks(oracle: &dyn GreenOracle, samples: &[(Vec<f64>, Vec<f64>)]) -> GradCheckReport {
    let n = oracle.dim();
    let mut rep = GradCheckReport {
        grad_x: 0.0,
        grad_y: 0.0,
        hess_xx: 0.0,
        hess_xy: 0.0,
        grad_tau: 0.0,
        hess_tau: 0.0,
    };
    for (x, y) in samples {
        let dmin = dist(x, y)
            .min(oracle.distance_to_boundary(x))
            .min(oracle.distance_to_boundary(y));
        let h = 0.005 * dmin;
        let hx = 0.005 * oracle.distance_to_boundary(x);
        let mut fd_gx = vec![0.0; n];
        let mut fd_gy = vec![0.0; n];
        let mut fd_hxx = vec![0.0; n * n];
        let mut fd_hxy = vec![0.0; n * n];
        let mut fd_gt = vec![0.0; n];
        let mut fd_ht = vec![0.0; n * n];
        for k in 0..n {
            fd_gx[k] = richardson_derivative(|p| vec![oracle.g(p, y)], x, k, h)[0];
            fd_gy[k] = richardson_derivative(|p| vec![oracle.g(x, p)], y, k, h)[0];
            fd_gt[k] = richardson_derivative(|p| vec![oracle.tau(p)], x, k, hx)[0];
            let dxx = richardson_derivative(|p| oracle.grad_x_g(p, y), x, k, h);
            let dxy = richardson_derivative(|p| oracle.grad_x_g(x, p), y, k, h);
            let dtt = richardson_derivative(|p| oracle.grad_tau(p), x, k, hx);
            for m in 0..n {
                // derivative in direction k of component m
                fd_hxx[m * n + k] = dxx[m];
                fd_hxy[m * n + k] = dxy[m];
                fd_ht[m * n + k] = dtt[m];
            }
        }
        rep.grad_x = rep.grad_x.max(rel_dev(&oracle.grad_x_g(x, y), &fd_gx));
        rep.grad_y = rep.grad_y.max(rel_dev(&oracle.grad_y_g(x, y), &fd_gy));
        rep.hess_xx = rep.hess_xx.max(rel_dev(&oracle.hess_xx_g(x, y), &fd_hxx));
        rep.hess_xy = rep.hess_xy.max(rel_dev(&oracle.hess_xy_g(x, y), &fd_hxy));
        rep.grad_tau = rep.grad_tau.max(rel_dev(&oracle.grad_tau(x), &fd_gt));
        rep.hess_tau = rep.hess_tau.max(rel_dev(&oracle.hess_tau(x), &fd_ht));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{gamma_n, ScaledBallOracle, UnitBallOracle};

    #[test]
    fn robin_at_center_three_dims() {
        let o = UnitBallOracle::new(3);
        let rep = robin_identities_check(&o, &[0.0; 3], 16).unwrap();
        assert!((rep.first_lhs - gamma_n(3)).abs() < 1e-12);
        assert!(rep.second_lhs.iter().all(|v| v.abs() < 1e-12));
        assert!(rep.max_residual() < 1e-10);
    }

    #[test]
    fn robin_off_center_three_dims() {
        let o = UnitBallOracle::new(3);
        let rep = robin_identities_check(&o, &[0.3, 0.0, 0.0], 64).unwrap();
        assert!(rep.max_residual() < 1e-6, "{:?}", rep.residuals);
    }

    #[test]
    fn robin_refuses_near_boundary() {
        let o = UnitBallOracle::new(3);
        assert!(matches!(
            robin_identities_check(&o, &[0.97, 0.0, 0.0], 16),
            Err(GreenError::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn robin_on_scaled_ball() {
        let o = ScaledBallOracle::new(vec![0.5, -1.0, 2.0, 0.0], 2.0);
        let rep = robin_identities_check(&o, &[0.9, -0.6, 2.3, 0.5], 24).unwrap();
        assert!(rep.max_residual() < 1e-6, "{:?}", rep.residuals);
    }

    #[test]
    fn jk_at_center() {
        let o = UnitBallOracle::new(3);
        let pts = vec![vec![0.0; 3]];
        for k in 0..3 {
            for q in 0..3 {
                let (j, kk) = jk_integrals(&o, 0, 0, 0, k, q, &pts, 0.2, 16).unwrap();
                assert!(j.abs() < 1e-12);
                let e = if k == q {
                    -(3.0 - 2.0) * gamma_n(3)
                } else {
                    0.0
                };
                assert!((kk - e).abs() < 1e-12, "{k}{q} {kk} {e}");
            }
        }
    }

    #[test]
    fn sphere_guards() {
        let o = UnitBallOracle::new(3);
        let pts = vec![vec![0.0; 3], vec![0.1, 0.0, 0.0]];
        assert!(matches!(
            i_integral(&o, 0, 0, 1, &pts, 0.2, 8),
            Err(GreenError::SphereMeetsPoint { i: 0, j: 1, .. })
        ));
        assert!(matches!(
            i_integral(&o, 1, 1, 1, &pts, 0.95, 8),
            Err(GreenError::SphereMeetsPoint { .. }) | Err(GreenError::SphereLeavesDomain { .. })
        ));
    }

    #[test]
    fn constant_fields_give_zero() {
        let f = Polynomial2::new(3.0, vec![0.0; 3], vec![0.0; 9]);
        let c = bilinear_pohozaev_check(&f, &f, &[0.0; 3], 1.0, 4, 4).unwrap();
        assert_eq!(c.residual, 0.0);
        assert_eq!(c.lhs, 0.0);
    }
}
