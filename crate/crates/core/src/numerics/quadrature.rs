use super::tridiag::symmetric_tridiagonal_eigenvalues;
use super::NumericsError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre rule with `k` nodes on `[a, b]`, nodes ascending.
pub fn gauss_legendre(k: usize, a: f64, b: f64) -> QuadratureRule {
    assert!(k >= 1, "gauss_legendre needs k >= 1");
    assert!(a < b, "gauss_legendre needs a < b");
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let half = k.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(k, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(k, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    let mid = 0.5 * (a + b);
    let half_len = 0.5 * (b - a);
    QuadratureRule {
        nodes: nodes.iter().map(|x| mid + half_len * x).collect(),
        weights: weights.iter().map(|w| w * half_len).collect(),
        interval: (a, b),
    }
}

fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if k == 0 {
        return (1.0, 0.0);
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule for the weight `(1 - t^2)^a` on `[-1, 1]`, `a >= 0`.
///
/// Nodes come from the Jacobi matrix by Sturm bisection, weights from the
/// Christoffel function.
pub fn gauss_jacobi_symmetric(k: usize, a: f64) -> QuadratureRule {
    assert!(k >= 1 && a >= 0.0);
    let off: Vec<f64> = (1..k)
        .map(|j| {
            let j = j as f64;
            (j * (j + 2.0 * a) / (4.0 * (j + a) * (j + a) - 1.0)).sqrt()
        })
        .collect();
    let diag = vec![0.0; k];
    let mut nodes = symmetric_tridiagonal_eigenvalues(&diag, &off);
    let mu0 = PI.sqrt() * gamma(a + 1.0) / gamma(a + 1.5);
    // enforce exact symmetry
    for i in 0..k / 2 {
        let s = 0.5 * (nodes[k - 1 - i] - nodes[i]);
        nodes[i] = -s;
        nodes[k - 1 - i] = s;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&t| {
            let mut prev = 0.0;
            let mut cur = 1.0 / mu0.sqrt();
            let mut sum = cur * cur;
            for j in 0..k - 1 {
                let b_prev = if j == 0 { 0.0 } else { off[j - 1] };
                let next = (t * cur - b_prev * prev) / off[j];
                prev = cur;
                cur = next;
                sum += cur * cur;
            }
            1.0 / sum
        })
        .collect();
    QuadratureRule {
        nodes,
        weights,
        interval: (-1.0, 1.0),
    }
}

/// `int_{R^n} f(|x|) dx` through `r = t/(1-t)` and Gauss-Legendre on `(0,1)`.
pub fn radial_integral<F: Fn(f64) -> f64>(f: F, n: usize, k: usize) -> Result<f64, NumericsError> {
    let rule = gauss_legendre(k, 0.0, 1.0);
    let mut acc = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let r = t / (1.0 - t);
        let jac = 1.0 / ((1.0 - t) * (1.0 - t));
        let v = f(r);
        if !v.is_finite() {
            return Err(NumericsError::NonFinite(r));
        }
        acc += w * v * r.powi(n as i32 - 1) * jac;
    }
    Ok(sphere_area(n) * acc)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn beta(a: f64, b: f64) -> f64 {
    gamma(a) * gamma(b) / gamma(a + b)
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}
