use super::newton::LinearSolve;
use super::NumericsError;
use serde::{Deserialize, Serialize};

/// Symmetric tridiagonal stiffness `A` with a positive diagonal mass `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalPencil {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    mass_diag: Vec<f64>,
}

impl TridiagonalPencil {
    pub fn new(
        diag: Vec<f64>,
        offdiag: Vec<f64>,
        mass_diag: Vec<f64>,
    ) -> Result<Self, NumericsError> {
        if diag.is_empty() {
            return Err(NumericsError::InvalidPencil("empty pencil".into()));
        }
        if offdiag.len() + 1 != diag.len() || mass_diag.len() != diag.len() {
            return Err(NumericsError::InvalidPencil(format!(
                "lengths diag={} offdiag={} mass={}",
                diag.len(),
                offdiag.len(),
                mass_diag.len()
            )));
        }
        if let Some(i) = mass_diag.iter().position(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(NumericsError::InvalidPencil(format!(
                "mass entry {i} = {} is not positive",
                mass_diag[i]
            )));
        }
        if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(NumericsError::InvalidPencil("non-finite stiffness".into()));
        }
        Ok(TridiagonalPencil {
            diag,
            offdiag,
            mass_diag,
        })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn mass_diag(&self) -> &[f64] {
        &self.mass_diag
    }

    /// Leading principal sub-pencil of order `k`.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.order());
        TridiagonalPencil {
            diag: self.diag[..k].to_vec(),
            offdiag: self.offdiag[..k - 1].to_vec(),
            mass_diag: self.mass_diag[..k].to_vec(),
        }
    }

    pub fn apply_stiffness(&self, v: &[f64]) -> Vec<f64> {
        tridiag_apply(&self.diag, &self.offdiag, v)
    }

    /// Number of eigenvalues strictly below `mu` (inertia of `A - mu B`).
    pub fn count_below(&self, mu: f64) -> usize {
        sturm_count(&self.diag, &self.offdiag, &self.mass_diag, mu)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.order();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs() / (self.mass_diag[i] * self.mass_diag[i - 1]).sqrt();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs() / (self.mass_diag[i] * self.mass_diag[i + 1]).sqrt();
            }
            let c = self.diag[i] / self.mass_diag[i];
            lo = lo.min(c - r);
            hi = hi.max(c + r);
        }
        let pad = 1e-12 * (lo.abs().max(hi.abs()) + 1.0);
        (lo - pad, hi + pad)
    }

    /// Eigenvalue with 0-based index `k`, by bisection on the inertia.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn tridiag_apply(diag: &[f64], off: &[f64], v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * v[i];
            if i > 0 {
                s += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += off[i] * v[i + 1];
            }
            s
        })
        .collect()
}

fn sturm_count(diag: &[f64], off: &[f64], mass: &[f64], mu: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let a = diag[i] - mu * mass[i];
        d = if i == 0 {
            a
        } else {
            a - off[i - 1] * off[i - 1] / d
        };
        if d == 0.0 {
            d = -f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending.
pub(crate) fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let p = TridiagonalPencil {
        diag: diag.to_vec(),
        offdiag: off.to_vec(),
        mass_diag: vec![1.0; diag.len()],
    };
    (0..diag.len()).map(|k| p.eigenvalue(k)).collect()
}

/// LU factorization of a general tridiagonal matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
    /// Largest entry of each original row.
    row_scale: Vec<f64>,
}

impl TridiagonalLu {
    /// `sub[i]` = entry (i+1, i), `diag[i]` = (i, i), `sup[i]` = (i, i+1).
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let row_scale: Vec<f64> = (0..n)
            .map(|i| {
                let a = if i > 0 { sub[i - 1].abs() } else { 0.0 };
                let c = if i + 1 < n { sup[i].abs() } else { 0.0 };
                a.max(c).max(diag[i].abs())
            })
            .collect();
        let mut u0 = diag.to_vec();
        let mut u1: Vec<f64> = sup.to_vec();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        let mut lower: Vec<f64> = sub.to_vec();
        for i in 0..n.saturating_sub(1) {
            if lower[i].abs() > u0[i].abs() {
                swapped[i] = true;
                // swap rows i and i+1
                let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
                u0[i] = lower[i];
                u1[i] = u0[i + 1];
                u2[i] = u1[i + 1];
                lower[i] = a0;
                u0[i + 1] = a1;
                u1[i + 1] = a2;
            }
            let f = if u0[i] == 0.0 { 0.0 } else { lower[i] / u0[i] };
            l[i] = f;
            u0[i + 1] -= f * u1[i];
            u1[i + 1] -= f * u2[i];
        }
        TridiagonalLu {
            l,
            u0,
            u1,
            u2,
            swapped,
            row_scale,
        }
    }

    pub fn from_pencil_shift(p: &TridiagonalPencil, mu: f64) -> Self {
        let diag: Vec<f64> = p
            .diag
            .iter()
            .zip(&p.mass_diag)
            .map(|(a, b)| a - mu * b)
            .collect();
        Self::factor(&p.offdiag, &diag, &p.offdiag)
    }

    pub fn min_pivot(&self) -> f64 {
        self.u0.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()))
    }

    /// Largest ratio of a row's size to its pivot, so that the estimate is
    /// blind to diagonal row scaling (pivoting may move a row down by one).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.u0.len();
        (0..n)
            .map(|i| {
                let s = if i + 1 < n {
                    self.row_scale[i].max(self.row_scale[i + 1])
                } else {
                    self.row_scale[i]
                };
                if self.u0[i] == 0.0 {
                    f64::INFINITY
                } else {
                    s / self.u0[i].abs()
                }
            })
            .fold(0.0, f64::max)
    }

    fn solve_unchecked(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut y = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.l[i] * y[i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * y[i + 2];
            }
            y[i] = s / self.u0[i];
        }
        y
    }
}

impl LinearSolve for TridiagonalLu {
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let c = self.condition_estimate();
        if !(c < 1e15) {
            return Err(NumericsError::SingularJacobian(c));
        }
        Ok(self.solve_unchecked(rhs))
    }
}

/// Lowest `count` eigenpairs of `A v = mu B v`.
///
/// Eigenvalues by bisection on the inertia of `A - mu B`, which is congruent
/// to `D^{-1/2} A D^{-1/2} - mu I` with `D = B`; eigenvectors by inverse
/// iteration, `B`-normalized and signed so the largest entry is positive.
pub fn tridiag_generalized_eigen(
    p: &TridiagonalPencil,
    count: usize,
) -> Result<Vec<(f64, Vec<f64>)>, NumericsError> {
    let n = p.order();
    if count > n {
        return Err(NumericsError::CountExceedsOrder {
            requested: count,
            order: n,
        });
    }
    let mut out = Vec::with_capacity(count);
    let scale = p
        .diag
        .iter()
        .chain(&p.offdiag)
        .fold(0.0f64, |m, x| m.max(x.abs()));
    for k in 0..count {
        let mu = p.eigenvalue(k);
        let mut shift = mu;
        let mut lu = TridiagonalLu::from_pencil_shift(p, shift);
        if lu.min_pivot() == 0.0 {
            shift = mu * (1.0 + 1e-14) + 1e-300;
            lu = TridiagonalLu::from_pencil_shift(p, shift);
        }
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.01 * ((i * 7919) % 13) as f64)
            .collect();
        normalize_b(&mut x, &p.mass_diag);
        let mut residual = f64::INFINITY;
        for _ in 0..6 {
            let rhs: Vec<f64> = x.iter().zip(&p.mass_diag).map(|(a, b)| a * b).collect();
            let mut y = lu.solve_unchecked(&rhs);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(NumericsError::InverseIterationStagnation(mu));
            }
            normalize_b(&mut y, &p.mass_diag);
            x = y;
            let ax = p.apply_stiffness(&x);
            let r: f64 = ax
                .iter()
                .zip(&x)
                .zip(&p.mass_diag)
                .map(|((a, v), b)| {
                    let t = (a - mu * b * v) / b.sqrt();
                    t * t
                })
                .sum::<f64>()
                .sqrt();
            residual = r;
            let tol =
                1e-9 * (scale.max(mu.abs()) + 1.0) * norm_inf_scaled(&x, &p.mass_diag).max(1.0);
            if r <= tol {
                break;
            }
        }
        if !residual.is_finite() {
            return Err(NumericsError::InverseIterationStagnation(mu));
        }
        let imax = x.iter().enumerate().fold(
            0,
            |best, (i, v)| if v.abs() > x[best].abs() { i } else { best },
        );
        if x[imax] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        out.push((mu, x));
    }
    Ok(out)
}

fn norm_inf_scaled(x: &[f64], b: &[f64]) -> f64 {
    x.iter()
        .zip(b)
        .fold(0.0, |m, (v, w)| m.max(v.abs() * w.sqrt()))
}

fn normalize_b(x: &mut [f64], b: &[f64]) {
    let s: f64 = x.iter().zip(b).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> (Vec<f64>, Vec<f64>, f64) {
        let h = 1.0 / (n as f64 + 1.0);
        (vec![2.0 / h; n], vec![-1.0 / h; n - 1], h)
    }

    #[test]
    fn dirichlet_laplacian_ground_state() {
        let (d, o, h) = laplacian(2000);
        let p = TridiagonalPencil::new(d, o, vec![h; 2000]).unwrap();
        let e = tridiag_generalized_eigen(&p, 1).unwrap();
        assert!((e[0].0 / (PI * PI) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mass_scaling_halves_spectrum() {
        let (d, o, h) = laplacian(200);
        let p1 = TridiagonalPencil::new(d.clone(), o.clone(), vec![h; 200]).unwrap();
        let p2 = TridiagonalPencil::new(d, o, vec![2.0 * h; 200]).unwrap();
        let e1 = tridiag_generalized_eigen(&p1, 4).unwrap();
        let e2 = tridiag_generalized_eigen(&p2, 4).unwrap();
        for k in 0..4 {
            assert!((e2[k].0 - 0.5 * e1[k].0).abs() < 1e-12 * e1[k].0);
        }
    }

    #[test]
    fn discrete_sine_spectrum() {
        let n = 50;
        let (d, o, h) = laplacian(n);
        let p = TridiagonalPencil::new(d, o, vec![h; n]).unwrap();
        let e = tridiag_generalized_eigen(&p, 6).unwrap();
        for (k, (mu, v)) in e.iter().enumerate() {
            let s = ((k + 1) as f64 * PI * h / 2.0).sin();
            let exact = 4.0 * s * s / (h * h);
            assert!((mu - exact).abs() < 1e-11 * exact, "{mu} {exact}");
            let bnorm: f64 = v.iter().map(|x| x * x * h).sum();
            assert!((bnorm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn count_exceeds_order() {
        let p = TridiagonalPencil::new(vec![1.0], vec![], vec![1.0]).unwrap();
        assert!(matches!(
            tridiag_generalized_eigen(&p, 2),
            Err(NumericsError::CountExceedsOrder { .. })
        ));
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(TridiagonalPencil::new(vec![1.0, 1.0], vec![0.0], vec![1.0, 0.0]).is_err());
        assert!(TridiagonalPencil::new(vec![1.0, 1.0], vec![], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn badly_scaled_mass_keeps_relative_accuracy() {
        // diagonal pencil with masses spanning many decades
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let mass: Vec<f64> = (0..n).map(|i| 10f64.powi(-(i as i32) / 3)).collect();
        let p = TridiagonalPencil::new(diag.clone(), vec![0.0; n - 1], mass.clone()).unwrap();
        let mut exact: Vec<f64> = diag.iter().zip(&mass).map(|(a, b)| a / b).collect();
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let e = tridiag_generalized_eigen(&p, 5).unwrap();
        for k in 0..5 {
            assert!((e[k].0 - exact[k]).abs() < 1e-14 * exact[k]);
        }
    }

    #[test]
    fn tridiagonal_lu_with_pivoting() {
        let sub = [3.0, 1.0];
        let diag = [0.0, 1.0, 2.0];
        let sup = [1.0, 5.0];
        let lu = TridiagonalLu::factor(&sub, &diag, &sup);
        let x_true = [1.0, -2.0, 0.5];
        let b = [
            diag[0] * x_true[0] + sup[0] * x_true[1],
            sub[0] * x_true[0] + diag[1] * x_true[1] + sup[1] * x_true[2],
            sub[1] * x_true[1] + diag[2] * x_true[2],
        ];
        let x = lu.solve(&b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-14);
        }
    }
}
