use super::linalg::{DenseMatrix, LuFactors};
use super::NumericsError;
use serde::{Deserialize, Serialize};

/// A factorized Jacobian.
pub trait LinearSolve {
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, NumericsError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub maxit: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            maxit: 50,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(
        0.0f64,
        |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) },
    )
}

/// Newton's method with step halving until the sup-norm residual decreases.
///
/// A residual containing non-finite entries marks an inadmissible iterate.
pub fn damped_newton<F, J, S>(
    mut residual: F,
    mut jacobian: J,
    x0: &[f64],
    opts: NewtonOptions,
) -> Result<NewtonOutcome, NumericsError>
where
    F: FnMut(&[f64]) -> Vec<f64>,
    J: FnMut(&[f64]) -> S,
    S: LinearSolve,
{
    let mut x = x0.to_vec();
    let mut f = residual(&x);
    let mut norm = sup_norm(&f);
    if !norm.is_finite() {
        return Err(NumericsError::NewtonLineSearch(norm));
    }
    for it in 0..=opts.maxit {
        if norm <= opts.tol {
            return Ok(NewtonOutcome {
                x,
                residual: norm,
                iterations: it,
            });
        }
        if it == opts.maxit {
            break;
        }
        let dx = jacobian(&x).solve(&f)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - t * d).collect();
            let ft = residual(&trial);
            let nt = sup_norm(&ft);
            if nt.is_finite() && nt < norm {
                x = trial;
                f = ft;
                norm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(NumericsError::NewtonLineSearch(norm));
        }
    }
    Err(NumericsError::NewtonMaxIterations {
        maxit: opts.maxit,
        residual: norm,
    })
}

/// Central-difference Jacobian with one Richardson level.
///
/// The step for coordinate `j` is `eps^{1/3} * max(|x_j|, scale)`.
pub fn fd_jacobian<F>(mut f: F, x: &[f64], scale: f64) -> DenseMatrix
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let m = f(x).len();
    let mut jac = DenseMatrix::zeros(m, n);
    let base = f64::EPSILON.cbrt();
    let mut xp = x.to_vec();
    let mut central = |j: usize, h: f64, xp: &mut Vec<f64>| -> Vec<f64> {
        xp[j] = x[j] + h;
        let fp = f(xp);
        xp[j] = x[j] - h;
        let fm = f(xp);
        xp[j] = x[j];
        fp.iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect()
    };
    for j in 0..n {
        let h = base * x[j].abs().max(scale);
        let d1 = central(j, h, &mut xp);
        let d2 = central(j, 0.5 * h, &mut xp);
        for i in 0..m {
            jac[(i, j)] = (4.0 * d2[i] - d1[i]) / 3.0;
        }
    }
    jac
}

/// Dense Newton solve with an LU-factorized Jacobian.
pub fn dense_solver(j: DenseMatrix) -> LuFactors {
    LuFactors::factor(&j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let out = damped_newton(
            |x| vec![x[0] * x[0] - 2.0],
            |x| dense_solver(DenseMatrix::from_fn(1, 1, |_, _| 2.0 * x[0])),
            &[1.0],
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((out.x[0] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn linear_in_one_step() {
        let out = damped_newton(
            |x| vec![x[0]],
            |_| dense_solver(DenseMatrix::identity(1)),
            &[5.0],
            NewtonOptions::default(),
        )
        .unwrap();
        assert_eq!(out.x, vec![0.0]);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn exact_root_is_fixed_point() {
        let out = damped_newton(
            |x| vec![x[0] * x[0] - 4.0],
            |x| dense_solver(DenseMatrix::from_fn(1, 1, |_, _| 2.0 * x[0])),
            &[2.0],
            NewtonOptions::default(),
        )
        .unwrap();
        assert_eq!(out.x, vec![2.0]);
        assert_eq!(out.iterations, 0);
    }

    fn rosenbrock_grad(x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0], x[1]);
        vec![
            -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
            200.0 * (b - a * a),
        ]
    }

    #[test]
    fn rosenbrock_gradient_root() {
        let out = damped_newton(
            rosenbrock_grad,
            |x| dense_solver(fd_jacobian(rosenbrock_grad, x, 1.0)),
            &[-1.2, 1.0],
            NewtonOptions {
                tol: 1e-10,
                maxit: 200,
                max_halvings: 60,
            },
        )
        .unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let f = |x: &[f64]| vec![x[0].sin() * x[1], x[1].exp()];
        let x = [0.3, -0.7];
        let j = fd_jacobian(f, &x, 1.0);
        let exact = [x[0].cos() * x[1], x[0].sin(), 0.0, x[1].exp()];
        for (a, b) in j.data.iter().zip(exact) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_jacobian_is_reported() {
        let r = damped_newton(
            |x| vec![x[0] * x[0] + 1.0],
            |_| dense_solver(DenseMatrix::zeros(1, 1)),
            &[0.0],
            NewtonOptions::default(),
        );
        assert!(matches!(r, Err(NumericsError::SingularJacobian(_))));
    }
}
