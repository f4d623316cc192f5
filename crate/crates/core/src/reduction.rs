//! Reduced energy `Υ_m` of `m` concentrating bubbles, its critical points,
//! and the matrices whose spectra predict the three eigenvalue bands.
//!
//! Gradients are laid out as `[λ_1..λ_m, x_1(1..n), .., x_m(1..n)]`.

use crate::constants::{b1, ConstantsTable};
use crate::green::{GreenError, GreenOracle};
use crate::numerics::{
    damped_newton, dense_solver, fd_jacobian, jacobi_eigen, zero_threshold, Cholesky, DenseMatrix,
    Eigen, NewtonOptions, NumericsError, SymmetricMatrix,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stationarity required by [`build_matrices`].
pub const STATIONARITY_TOL: f64 = 1e-8;
const JACOBI_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("lambdas[{0}] must be positive and finite")]
    NonPositiveLambda(usize),
    #[error("points[{0}] lies outside the domain")]
    PointOutside(usize),
    #[error("points[{i}] and points[{j}] coincide")]
    CoincidentPoints { i: usize, j: usize },
    #[error("points[{index}] has {got} coordinates, expected {expected}")]
    PointDimension {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("{lambdas} lambdas but {points} points")]
    CountMismatch { lambdas: usize, points: usize },
    #[error("configuration is empty")]
    Empty,
    #[error("configuration dimension {config} differs from oracle dimension {oracle}")]
    OracleDimension { config: usize, oracle: usize },
    #[error("configuration is not stationary (measure {0:e})")]
    NotStationary(f64),
    #[error("M1 is not positive definite (pivot {pivot} = {value:e})")]
    M1NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("no critical point found: {0}")]
    NoCriticalPoint(String),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Concentration rates and points, the argument of `Υ_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl Configuration {
    pub fn new(n: usize, lambdas: Vec<f64>, points: Vec<Vec<f64>>) -> Self {
        Configuration { n, lambdas, points }
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    pub fn validate(&self, oracle: &dyn GreenOracle) -> Result<(), ReductionError> {
        if self.n != oracle.dim() {
            return Err(ReductionError::OracleDimension {
                config: self.n,
                oracle: oracle.dim(),
            });
        }
        if self.lambdas.is_empty() {
            return Err(ReductionError::Empty);
        }
        if self.lambdas.len() != self.points.len() {
            return Err(ReductionError::CountMismatch {
                lambdas: self.lambdas.len(),
                points: self.points.len(),
            });
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(ReductionError::NonPositiveLambda(i));
            }
        }
        for (i, x) in self.points.iter().enumerate() {
            if x.len() != self.n {
                return Err(ReductionError::PointDimension {
                    index: i,
                    expected: self.n,
                    got: x.len(),
                });
            }
            if !oracle.contains(x) {
                return Err(ReductionError::PointOutside(i));
            }
            for j in 0..i {
                if self.points[j] == *x {
                    return Err(ReductionError::CoincidentPoints { i: j, j: i });
                }
            }
        }
        Ok(())
    }

    /// Bubbles relabelled so that new bubble `k` is old bubble `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Configuration {
            n: self.n,
            lambdas: perm.iter().map(|&k| self.lambdas[k]).collect(),
            points: perm.iter().map(|&k| self.points[k].clone()).collect(),
        }
    }

    /// The formulas are only proved for `n ≥ 4`; `n = 3` results carry this flag.
    pub fn conditional(&self) -> bool {
        self.n == 3
    }

    fn to_log_coords(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self.lambdas.iter().map(|l| l.ln()).collect();
        for x in &self.points {
            z.extend_from_slice(x);
        }
        z
    }

    fn from_log_coords(n: usize, m: usize, z: &[f64]) -> Self {
        Configuration {
            n,
            lambdas: z[..m].iter().map(|v| v.exp()).collect(),
            points: (0..m)
                .map(|i| z[m + i * n..m + (i + 1) * n].to_vec())
                .collect(),
        }
    }
}

fn half_power(n: usize) -> f64 {
    0.5 * (n as f64 - 2.0)
}

pub fn upsilon(cfg: &Configuration, oracle: &dyn GreenOracle, table: &ConstantsTable) -> f64 {
    let n = cfg.n;
    let a = half_power(n);
    let m = cfg.m();
    let mut self_part = 0.0;
    let mut inter = 0.0;
    let mut logs = 0.0;
    for i in 0..m {
        let li = cfg.lambdas[i];
        self_part += oracle.tau(&cfg.points[i]) * li.powi(n as i32 - 2);
        logs += li.ln();
        for j in 0..m {
            if j != i {
                inter += oracle.g(&cfg.points[i], &cfg.points[j]) * (li * cfg.lambdas[j]).powf(a);
            }
        }
    }
    table.c1_energy * (self_part - inter) - table.c2_energy * logs
}

pub fn upsilon_grad(
    cfg: &Configuration,
    oracle: &dyn GreenOracle,
    table: &ConstantsTable,
) -> Vec<f64> {
    let n = cfg.n;
    let nf = n as f64;
    let a = half_power(n);
    let m = cfg.m();
    let c1 = table.c1_energy;
    let mut grad = vec![0.0; m + m * n];
    let mut buf = vec![0.0; n];
    for i in 0..m {
        let li = cfg.lambdas[i];
        let xi = &cfg.points[i];
        let tau = oracle.tau(xi);
        let mut dl = (nf - 2.0) * tau * li.powi(n as i32 - 3);
        oracle.grad_tau_into(xi, &mut buf);
        let lpow = li.powi(n as i32 - 2);
        for k in 0..n {
            grad[m + i * n + k] = c1 * buf[k] * lpow;
        }
        for j in 0..m {
            if j == i {
                continue;
            }
            let lj = cfg.lambdas[j];
            let xj = &cfg.points[j];
            dl -= (nf - 2.0) * oracle.g(xi, xj) * li.powf(a - 1.0) * lj.powf(a);
            oracle.grad_x_g_into(xi, xj, &mut buf);
            let w = 2.0 * c1 * (li * lj).powf(a);
            for k in 0..n {
                grad[m + i * n + k] -= w * buf[k];
            }
        }
        grad[i] = c1 * dl - table.c2_energy / li;
    }
    grad
}

/// Scale-free stationarity measure `‖(λ∘∂_λΥ, ∂_xΥ)‖_∞ / c2`.
///
/// `λ∂_λ` is the derivative in `log λ`, which removes the `1/λ` blow-up of
/// the barrier term; `c2` sets the energy unit.
pub fn stationarity(cfg: &Configuration, oracle: &dyn GreenOracle, table: &ConstantsTable) -> f64 {
    scaled_gradient(cfg, oracle, table)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

fn scaled_gradient(
    cfg: &Configuration,
    oracle: &dyn GreenOracle,
    table: &ConstantsTable,
) -> Vec<f64> {
    let m = cfg.m();
    let mut g = upsilon_grad(cfg, oracle, table);
    for (i, v) in g.iter_mut().enumerate() {
        if i < m {
            *v *= cfg.lambdas[i];
        }
        *v /= table.c2_energy;
    }
    g
}

/// Damped Newton on the scaled gradient in `(log λ, x)` coordinates.
pub fn find_critical(
    cfg0: &Configuration,
    oracle: &dyn GreenOracle,
    table: &ConstantsTable,
    tol: f64,
) -> Result<Configuration, ReductionError> {
    cfg0.validate(oracle)?;
    let (n, m) = (cfg0.n, cfg0.m());
    let residual = |z: &[f64]| -> Vec<f64> {
        let c = Configuration::from_log_coords(n, m, z);
        match c.validate(oracle) {
            Ok(()) if z[..m].iter().all(|v| v.abs() < 60.0) => scaled_gradient(&c, oracle, table),
            _ => vec![f64::NAN; z.len()],
        }
    };
    let jacobian = |z: &[f64]| dense_solver(fd_jacobian(residual, z, 1e-2));
    let opts = NewtonOptions {
        tol,
        maxit: 100,
        max_halvings: 50,
    };
    let out = damped_newton(residual, jacobian, &cfg0.to_log_coords(), opts)
        .map_err(|e| ReductionError::NoCriticalPoint(e.to_string()))?;
    let cfg = Configuration::from_log_coords(n, m, &out.x);
    if cfg.lambdas.iter().any(|&l| !(l > 1e-12 && l < 1e12)) {
        return Err(ReductionError::NoCriticalPoint(
            "a concentration rate escaped to 0 or infinity".into(),
        ));
    }
    Ok(cfg)
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionMatrices {
    pub n: usize,
    pub m: usize,
    pub A1: SymmetricMatrix,
    pub M1: SymmetricMatrix,
    pub M2: SymmetricMatrix,
    /// `m × mn`.
    pub P: DenseMatrix,
    pub Q: SymmetricMatrix,
    pub A2: SymmetricMatrix,
    pub A3: SymmetricMatrix,
    /// Largest `|Q_st - Q_ts|` of the entrywise assembly before symmetrization.
    pub q_asymmetry: f64,
    /// Largest entry difference between the Cholesky and eigen-inverse paths to `A2`.
    pub a2_path_difference: f64,
    /// Stationarity measure of the input configuration.
    pub stationarity: f64,
}

/// Entrywise `Q` before symmetrization and its largest relative asymmetry
/// `max|Q_st - Q_ts| / max|Q|`. Needs no stationarity.
pub fn assemble_q(
    cfg: &Configuration,
    oracle: &dyn GreenOracle,
) -> Result<(DenseMatrix, f64), ReductionError> {
    cfg.validate(oracle)?;
    Ok(assemble_q_unchecked(cfg, oracle))
}

fn assemble_q_unchecked(cfg: &Configuration, oracle: &dyn GreenOracle) -> (DenseMatrix, f64) {
    let n = cfg.n;
    let m = cfg.m();
    let a = half_power(n);
    let nf = n as f64;
    let lam = &cfg.lambdas;
    let x = &cfg.points;
    let mut q = DenseMatrix::zeros(m * n, m * n);
    let mut hb = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                oracle.hess_tau_into(&x[i], &mut hb);
                let w = -0.5 * lam[i].powi(n as i32);
                let mut block: Vec<f64> = hb.iter().map(|v| w * v).collect();
                for l in 0..m {
                    if l == i {
                        continue;
                    }
                    oracle.hess_xx_g_into(&x[i], &x[l], &mut hb);
                    let wl = lam[i].powf(0.5 * (nf + 2.0)) * lam[l].powf(a);
                    for (b, h) in block.iter_mut().zip(&hb) {
                        *b += wl * h;
                    }
                }
                for k in 0..n {
                    for qq in 0..n {
                        q[(i * n + k, i * n + qq)] = block[k * n + qq];
                    }
                }
            } else {
                oracle.hess_xy_g_into(&x[i], &x[j], &mut hb);
                let w = (lam[i] * lam[j]).powf(0.5 * nf);
                for k in 0..n {
                    for qq in 0..n {
                        q[(i * n + k, j * n + qq)] = w * hb[k * n + qq];
                    }
                }
            }
        }
    }
    let mut q_asym: f64 = 0.0;
    let q_scale = q.max_abs().max(f64::MIN_POSITIVE);
    for s in 0..m * n {
        for t in 0..s {
            q_asym = q_asym.max((q[(s, t)] - q[(t, s)]).abs() / q_scale);
        }
    }
    (q, q_asym)
}

#[allow(non_snake_case)]
pub fn build_matrices(
    cfg: &Configuration,
    oracle: &dyn GreenOracle,
    table: &ConstantsTable,
) -> Result<ReductionMatrices, ReductionError> {
    cfg.validate(oracle)?;
    let st = stationarity(cfg, oracle, table);
    if !(st <= STATIONARITY_TOL) {
        return Err(ReductionError::NotStationary(st));
    }
    let n = cfg.n;
    let m = cfg.m();
    let a = half_power(n);
    let nf = n as f64;
    let lam = &cfg.lambdas;
    let x = &cfg.points;
    let c0 = table.C0;
    let tau: Vec<f64> = x.iter().map(|p| oracle.tau(p)).collect();
    let g = |i: usize, j: usize| oracle.g(&x[i], &x[j]);

    let A1 = SymmetricMatrix::from_lower(m, |i, j| {
        if i == j {
            -c0 + lam[i].powi(n as i32 - 2) * tau[i]
        } else {
            -(lam[i] * lam[j]).powf(a) * g(i, j)
        }
    });
    let M1 = SymmetricMatrix::from_lower(m, |i, j| {
        if i == j {
            c0 * lam[i].powf(2.0 - nf) + tau[i]
        } else {
            -g(i, j)
        }
    });
    let M2 = SymmetricMatrix::from_lower(m, |i, j| if i == j { tau[i] } else { -g(i, j) });
    let A3 = SymmetricMatrix::from_lower(m, |i, j| {
        if i == j {
            c0 + lam[i].powi(n as i32 - 2) * tau[i]
        } else {
            -(lam[i] * lam[j]).powf(a) * g(i, j)
        }
    });

    let mut P = DenseMatrix::zeros(m, m * n);
    let mut buf = vec![0.0; n];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                oracle.grad_tau_into(&x[i], &mut buf);
                let w = -0.5 * lam[i].powf(0.5 * nf);
                for k in 0..n {
                    P[(i, j * n + k)] = w * buf[k];
                }
            } else {
                // ∂G/∂y_k(x_i, x_j) = ∂G/∂x_k(x_j, x_i)
                oracle.grad_x_g_into(&x[j], &x[i], &mut buf);
                let w = lam[j].powf(0.5 * nf);
                for k in 0..n {
                    P[(i, j * n + k)] = w * buf[k];
                }
            }
        }
    }

    let (q, q_asym) = assemble_q_unchecked(cfg, oracle);
    let Q = SymmetricMatrix::symmetrize(&q);

    let chol = Cholesky::factor(&M1).map_err(|e| match e {
        NumericsError::NotPositiveDefinite { pivot, value } => {
            ReductionError::M1NotPositiveDefinite { pivot, value }
        }
        other => other.into(),
    })?;
    let minv_p = chol.solve_matrix(&P);
    let a2_chol = P.transpose().matmul(&minv_p);
    let a2_eig = a2_via_eigen_inverse(&M1, &P)?;
    let mut diff: f64 = 0.0;
    for (u, v) in a2_chol.data.iter().zip(&a2_eig.data) {
        diff = diff.max((u - v).abs());
    }
    let qd = Q.to_dense();
    let sum = DenseMatrix::from_fn(m * n, m * n, |s, t| a2_chol[(s, t)] + qd[(s, t)]);
    let A2 = SymmetricMatrix::symmetrize(&sum);

    Ok(ReductionMatrices {
        n,
        m,
        A1,
        M1,
        M2,
        P,
        Q,
        A2,
        A3,
        q_asymmetry: q_asym,
        a2_path_difference: diff,
        stationarity: st,
    })
}

/// `PᵀM⁻¹P` through `M = V diag(ρ) Vᵀ`, an independent route to the Cholesky solve.
fn a2_via_eigen_inverse(
    m1: &SymmetricMatrix,
    p: &DenseMatrix,
) -> Result<DenseMatrix, ReductionError> {
    let e = jacobi_eigen(m1, JACOBI_TOL)?;
    let vt_p = e.vectors.transpose().matmul(p);
    let scaled = DenseMatrix::from_fn(vt_p.rows, vt_p.cols, |r, c| vt_p[(r, c)] / e.values[r]);
    Ok(vt_p.transpose().matmul(&scaled))
}

/// Ascending spectra of `A1`, `A2`, `A3`. Eigenvectors have unit length;
/// they stand for `c_ℓ`, `d_ℓ`, `d̂_ℓ` only up to a nonzero factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectra {
    pub rho1: Eigen,
    pub rho2: Eigen,
    pub rho3: Eigen,
}

pub fn spectra(mat: &ReductionMatrices) -> Result<Spectra, ReductionError> {
    Ok(Spectra {
        rho1: jacobi_eigen(&mat.A1, JACOBI_TOL)?,
        rho2: jacobi_eigen(&mat.A2, JACOBI_TOL)?,
        rho3: jacobi_eigen(&mat.A3, JACOBI_TOL)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    FirstM,
    MiddleMn,
    LastM,
}

/// `μ(ε) = base + coefficient·ε^exponent` for eigenvalue number `index` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPrediction {
    pub index: usize,
    pub band: Band,
    pub rho: f64,
    pub base: f64,
    pub coefficient: f64,
    pub exponent: f64,
}

impl SpectralPrediction {
    pub fn mu(&self, eps: f64) -> f64 {
        self.base + self.coefficient * eps.powf(self.exponent)
    }
}

/// Predictions for `ℓ = 1..(n+2)m`, bands in order and ascending `ρ` within each.
pub fn predict(
    spec: &Spectra,
    table: &ConstantsTable,
    n: usize,
    m: usize,
) -> Vec<SpectralPrediction> {
    let nf = n as f64;
    let mut out = Vec::with_capacity((n + 2) * m);
    for &r in &spec.rho1.values {
        out.push(SpectralPrediction {
            index: out.len() + 1,
            band: Band::FirstM,
            rho: r,
            base: 1.0 / table.p,
            coefficient: b1(table, r),
            exponent: 1.0,
        });
    }
    for &r in &spec.rho2.values {
        out.push(SpectralPrediction {
            index: out.len() + 1,
            band: Band::MiddleMn,
            rho: r,
            base: 1.0,
            coefficient: -table.c0_spec * r,
            exponent: nf / (nf - 2.0),
        });
    }
    for &r in &spec.rho3.values {
        out.push(SpectralPrediction {
            index: out.len() + 1,
            band: Band::LastM,
            rho: r,
            base: 1.0,
            coefficient: table.c1_spec * r,
            exponent: 1.0,
        });
    }
    debug_assert_eq!(out.len(), (n + 2) * m);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseBounds {
    pub lower: usize,
    pub upper: usize,
    pub nondegenerate: bool,
    pub exact: Option<usize>,
    pub tol_zero: f64,
}

/// Bounds from the middle-band spectrum: `m + #{ρ² > tol} ≤ ind ≤ m + #{ρ² ≥ -tol}`.
pub fn morse_bounds(rho2: &[f64], m: usize, tol_zero: f64) -> MorseBounds {
    let lower = m + rho2.iter().filter(|&&r| r > tol_zero).count();
    let upper = m + rho2.iter().filter(|&&r| r >= -tol_zero).count();
    let nondegenerate = rho2.iter().all(|r| r.abs() > tol_zero);
    MorseBounds {
        lower,
        upper,
        nondegenerate,
        exact: if nondegenerate { Some(lower) } else { None },
        tol_zero,
    }
}

/// Default zero threshold `1e-9·max(1, ‖A2‖_F)`.
pub fn default_tol_zero(mat: &ReductionMatrices) -> f64 {
    zero_threshold(mat.A2.frobenius())
}

/// Everything the pipeline computes for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub configuration: Configuration,
    pub conditional: bool,
    pub upsilon: f64,
    pub matrices: ReductionMatrices,
    pub spectra: Spectra,
    pub predictions: Vec<SpectralPrediction>,
    pub morse: MorseBounds,
    pub m1_min_eigenvalue: f64,
    pub m2_min_eigenvalue: f64,
}

/// Runs the matrix pipeline on a stationary configuration.
pub fn analyze(
    cfg: &Configuration,
    oracle: &dyn GreenOracle,
    table: &ConstantsTable,
    tol_zero: Option<f64>,
) -> Result<ReductionReport, ReductionError> {
    let matrices = build_matrices(cfg, oracle, table)?;
    let spec = spectra(&matrices)?;
    let tol = tol_zero.unwrap_or_else(|| default_tol_zero(&matrices));
    let morse = morse_bounds(&spec.rho2.values, cfg.m(), tol);
    let m1_min = jacobi_eigen(&matrices.M1, JACOBI_TOL)?.values[0];
    let m2_min = jacobi_eigen(&matrices.M2, JACOBI_TOL)?.values[0];
    Ok(ReductionReport {
        configuration: cfg.clone(),
        conditional: cfg.conditional(),
        upsilon: upsilon(cfg, oracle, table),
        predictions: predict(&spec, table, cfg.n, cfg.m()),
        spectra: spec,
        morse,
        m1_min_eigenvalue: m1_min,
        m2_min_eigenvalue: m2_min,
        matrices,
    })
}

/// Closed-form critical configuration of one bubble at the center of a ball,
/// `λ^{n-2} τ(c) = C0`.
pub fn ball_center_configuration(
    oracle: &dyn GreenOracle,
    table: &ConstantsTable,
) -> Configuration {
    let c = oracle.domain().center;
    let lambda = table.lambda_star(oracle.tau(&c));
    Configuration::new(oracle.dim(), vec![lambda], vec![c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::build_constants;
    use crate::green::{gamma_n, UnitBallOracle};
    use approx::assert_relative_eq;

    fn setup(n: usize) -> (UnitBallOracle, ConstantsTable) {
        (UnitBallOracle::new(n), build_constants(n).unwrap())
    }

    #[test]
    fn single_bubble_energy_closed_form() {
        let (o, t) = setup(4);
        let cfg = Configuration::new(4, vec![0.7], vec![vec![0.0; 4]]);
        let expect = t.c1_energy * gamma_n(4) * 0.49 - t.c2_energy * 0.7f64.ln();
        assert_relative_eq!(upsilon(&cfg, &o, &t), expect, max_relative = 1e-14);
    }

    #[test]
    fn gradient_vanishes_at_closed_form_critical_point() {
        for n in 3..=5 {
            let (o, t) = setup(n);
            let cfg = ball_center_configuration(&o, &t);
            let lam = (t.C0 / gamma_n(n)).powf(1.0 / (n as f64 - 2.0));
            assert_relative_eq!(cfg.lambdas[0], lam, max_relative = 1e-15);
            let g = upsilon_grad(&cfg, &o, &t);
            assert!(g.iter().all(|v| v.abs() <= 1e-10), "n={n} {g:?}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (o, t) = setup(4);
        let cfg = Configuration::new(
            4,
            vec![0.3, 0.5, 0.4],
            vec![
                vec![0.2, 0.1, 0.0, -0.1],
                vec![-0.3, 0.2, 0.1, 0.0],
                vec![0.0, -0.4, 0.2, 0.1],
            ],
        );
        let g = upsilon_grad(&cfg, &o, &t);
        let m = cfg.m();
        let h = 1e-6;
        for idx in 0..g.len() {
            let mut cp = cfg.clone();
            let mut cm = cfg.clone();
            if idx < m {
                cp.lambdas[idx] += h;
                cm.lambdas[idx] -= h;
            } else {
                let (i, k) = ((idx - m) / 4, (idx - m) % 4);
                cp.points[i][k] += h;
                cm.points[i][k] -= h;
            }
            let fd = (upsilon(&cp, &o, &t) - upsilon(&cm, &o, &t)) / (2.0 * h);
            assert!(
                (fd - g[idx]).abs() <= 1e-7 * g[idx].abs().max(1.0),
                "{idx}: {fd} vs {}",
                g[idx]
            );
        }
    }

    #[test]
    fn newton_finds_ball_center() {
        for n in 3..=5 {
            let (o, t) = setup(n);
            let mut x = vec![0.0; n];
            x[0] = 0.1;
            let cfg =
                find_critical(&Configuration::new(n, vec![1.0], vec![x]), &o, &t, 1e-12).unwrap();
            let exact = ball_center_configuration(&o, &t);
            assert_relative_eq!(cfg.lambdas[0], exact.lambdas[0], max_relative = 1e-10);
            assert!(cfg.points[0].iter().all(|v| v.abs() < 1e-10));
            let again = find_critical(&cfg, &o, &t, 1e-12).unwrap();
            assert_eq!(again, cfg);
        }
    }

    #[test]
    fn ball_center_matrices() {
        for n in 3..=5 {
            let (o, t) = setup(n);
            let cfg = ball_center_configuration(&o, &t);
            let lam = cfg.lambdas[0];
            let mat = build_matrices(&cfg, &o, &t).unwrap();
            assert!(mat.P.data.iter().all(|&v| v == 0.0));
            assert!(mat.A1.get(0, 0).abs() <= 1e-12 * t.C0);
            assert_relative_eq!(mat.A3.get(0, 0), 2.0 * t.C0, max_relative = 1e-12);
            // The matrix as defined: Q = -λⁿ/2 D²τ, and D²τ(0) = 2(n-2)γ_n I.
            let expect = -(n as f64 - 2.0) * gamma_n(n) * lam.powi(n as i32);
            for k in 0..n {
                for q in 0..n {
                    let e = if k == q { expect } else { 0.0 };
                    assert!((mat.A2.get(k, q) - e).abs() <= 1e-12 * expect.abs());
                }
            }
            let sp = spectra(&mat).unwrap();
            let mb = morse_bounds(&sp.rho2.values, 1, default_tol_zero(&mat));
            assert_eq!((mb.lower, mb.upper, mb.exact), (1, 1, Some(1)));
        }
    }

    #[test]
    fn rejects_non_stationary_input() {
        let (o, t) = setup(4);
        let cfg = Configuration::new(4, vec![0.2], vec![vec![0.3, 0.0, 0.0, 0.0]]);
        assert!(matches!(
            build_matrices(&cfg, &o, &t),
            Err(ReductionError::NotStationary(_))
        ));
    }

    #[test]
    fn predictions_cover_all_bands() {
        let (o, t) = setup(3);
        let cfg = ball_center_configuration(&o, &t);
        let mat = build_matrices(&cfg, &o, &t).unwrap();
        let sp = spectra(&mat).unwrap();
        let pr = predict(&sp, &t, 3, 1);
        assert_eq!(pr.len(), 5);
        assert_eq!(pr.iter().filter(|p| p.band == Band::MiddleMn).count(), 3);
        let mu1 = pr[0].mu(0.01);
        assert!((mu1 - (0.2 + 0.04 * 0.01)).abs() < 1e-9);
        assert_eq!(pr[1].mu(0.0), 1.0);
        assert_relative_eq!(
            pr[4].coefficient,
            t.c1_spec * 2.0 * t.C0,
            max_relative = 1e-12
        );
        assert!(cfg.conditional());
    }

    #[test]
    fn morse_bounds_degenerate_and_range() {
        let mb = morse_bounds(&[0.0; 8], 2, 1e-9);
        assert_eq!(
            (mb.lower, mb.upper, mb.nondegenerate, mb.exact),
            (2, 10, false, None)
        );
        let mb = morse_bounds(&[1.0, -1.0, 2.0], 1, 1e-9);
        assert_eq!((mb.lower, mb.upper, mb.exact), (3, 3, Some(3)));
    }

    #[test]
    fn validation_names_offending_entries() {
        let (o, _) = setup(3);
        let bad = Configuration::new(3, vec![0.1, -1.0], vec![vec![0.0; 3], vec![0.1; 3]]);
        assert_eq!(bad.validate(&o), Err(ReductionError::NonPositiveLambda(1)));
        let out = Configuration::new(3, vec![0.1], vec![vec![1.0, 0.5, 0.0]]);
        assert_eq!(out.validate(&o), Err(ReductionError::PointOutside(0)));
        let same = Configuration::new(3, vec![0.1, 0.2], vec![vec![0.1; 3], vec![0.1; 3]]);
        assert!(matches!(
            same.validate(&o),
            Err(ReductionError::CoincidentPoints { .. })
        ));
    }
}
