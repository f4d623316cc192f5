//! The bubble family `U_{λ,x0}(x) = β_n (λ/(λ²+|x-x0|²))^{(n-2)/2}` and
//! its derivatives.

use crate::green::GreenOracle;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BubbleError {
    #[error("dimension {0} is below 3")]
    Dimension(usize),
    #[error("epsilon {0} is outside [0, p-1)")]
    Epsilon(f64),
    #[error("lambda must be positive, got {0}")]
    Lambda(f64),
    #[error("bubble center lies outside the domain")]
    CenterOutside,
}

/// Exponents of `-Δu = u^{p-ε}` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub epsilon: f64,
    pub p: f64,
    pub alpha0: f64,
    pub sigma_eps: f64,
}

impl ProblemParams {
    pub fn new(n: usize, epsilon: f64) -> Result<Self, BubbleError> {
        if n < 3 {
            return Err(BubbleError::Dimension(n));
        }
        let nf = n as f64;
        let p = (nf + 2.0) / (nf - 2.0);
        if !(epsilon >= 0.0) || p - epsilon <= 1.0 {
            return Err(BubbleError::Epsilon(epsilon));
        }
        Ok(ProblemParams {
            n,
            epsilon,
            p,
            alpha0: 1.0 / (nf - 2.0),
            sigma_eps: 2.0 / (p - 1.0 - epsilon),
        })
    }

    /// Exponent `q = p - ε` of the nonlinearity.
    pub fn q(&self) -> f64 {
        self.p - self.epsilon
    }
}

/// Concentration rate and center of one bubble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub lambda: f64,
    pub center: Vec<f64>,
}

impl BubbleParams {
    pub fn new(lambda: f64, center: Vec<f64>) -> Result<Self, BubbleError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(BubbleError::Lambda(lambda));
        }
        Ok(BubbleParams { lambda, center })
    }

    pub fn standard(n: usize) -> Self {
        BubbleParams {
            lambda: 1.0,
            center: vec![0.0; n],
        }
    }
}

/// `β_n = (n(n-2))^{(n-2)/4}`.
pub fn beta_n(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0)
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Radial profile `U_{λ,0}(r)`.
pub fn bubble_radial(n: usize, lambda: f64, r: f64) -> f64 {
    let a = 0.5 * (n as f64 - 2.0);
    beta_n(n) * (lambda / (lambda * lambda + r * r)).powf(a)
}

/// `d/dr U_{λ,0}(r)`.
pub fn bubble_radial_derivative(n: usize, lambda: f64, r: f64) -> f64 {
    let nf = n as f64;
    -(nf - 2.0) * bubble_radial(n, lambda, r) * r / (lambda * lambda + r * r)
}

/// `∂_λ U_{λ,0}(r)`.
pub fn bubble_radial_dlambda(n: usize, lambda: f64, r: f64) -> f64 {
    let a = 0.5 * (n as f64 - 2.0);
    let l2 = lambda * lambda;
    a * bubble_radial(n, lambda, r) * (r * r - l2) / (lambda * (l2 + r * r))
}

pub fn bubble(b: &BubbleParams, x: &[f64], n: usize) -> f64 {
    bubble_radial(n, b.lambda, dist2(x, &b.center).sqrt())
}

pub fn bubble_dlambda(b: &BubbleParams, x: &[f64], n: usize) -> f64 {
    bubble_radial_dlambda(n, b.lambda, dist2(x, &b.center).sqrt())
}

/// `∂U/∂x_k`.
pub fn bubble_dx(b: &BubbleParams, x: &[f64], k: usize, n: usize) -> f64 {
    let d2 = dist2(x, &b.center);
    let nf = n as f64;
    -(nf - 2.0) * bubble(b, x, n) * (x[k] - b.center[k]) / (b.lambda * b.lambda + d2)
}

/// Value of the projected bubble and whether the clamp at zero was active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projected {
    pub value: f64,
    pub clamped: bool,
}

/// First-order projected bubble `U - C2 λ^{(n-2)/2} H(x, x0)`, clamped at 0.
pub fn projected_bubble_ball(
    b: &BubbleParams,
    x: &[f64],
    oracle: &dyn GreenOracle,
    c2: f64,
) -> Result<Projected, BubbleError> {
    if !oracle.contains(&b.center) {
        return Err(BubbleError::CenterOutside);
    }
    let n = oracle.dim();
    let a = 0.5 * (n as f64 - 2.0);
    let v = bubble(b, x, n) - c2 * b.lambda.powf(a) * oracle.h(x, &b.center);
    Ok(if v < 0.0 {
        Projected {
            value: 0.0,
            clamped: true,
        }
    } else {
        Projected {
            value: v,
            clamped: false,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub c_estimate: f64,
    pub satisfied: bool,
}

/// Supremum of `ũ(ρ)/U_{1,0}(ρ)` over a radial grid, compared with `cap`.
pub fn decay_check(radii: &[f64], values: &[f64], n: usize, cap: f64) -> DecayCheck {
    let c = radii
        .iter()
        .zip(values)
        .map(|(&r, &v)| v / bubble_radial(n, 1.0, r))
        .fold(0.0, f64::max);
    DecayCheck {
        c_estimate: c,
        satisfied: c <= cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::UnitBallOracle;
    use approx::assert_relative_eq;

    #[test]
    fn center_values() {
        let b = BubbleParams::standard(3);
        assert_relative_eq!(
            bubble(&b, &[0.0; 3], 3),
            3f64.powf(0.25),
            max_relative = 1e-15
        );
    }

    #[test]
    fn n4_unit_radius_value() {
        // β_4 = sqrt(8), (1/2)^1 → sqrt(8)/2
        let v = bubble(&BubbleParams::standard(4), &[0.0, 1.0, 0.0, 0.0], 4);
        assert_relative_eq!(v, 8f64.sqrt() / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn params_sigma_limit() {
        let p = ProblemParams::new(4, 0.0).unwrap();
        assert_eq!(p.sigma_eps, 1.0);
        assert_eq!(p.p, 3.0);
        assert!(ProblemParams::new(4, 2.0).is_err());
        assert!(ProblemParams::new(2, 0.1).is_err());
    }

    #[test]
    fn dlambda_vanishes_at_radius_lambda() {
        let b = BubbleParams::new(0.7, vec![0.1, 0.0, 0.0]).unwrap();
        assert!(bubble_dlambda(&b, &[0.8, 0.0, 0.0], 3).abs() < 1e-15);
        assert!(bubble_dlambda(&BubbleParams::standard(3), &[0.0; 3], 3) < 0.0);
    }

    #[test]
    fn dx_zero_at_center() {
        let b = BubbleParams::standard(5);
        assert_eq!(bubble_dx(&b, &[0.0; 5], 2, 5), 0.0);
    }

    #[test]
    fn projected_bubble_on_boundary_is_small() {
        let o = UnitBallOracle::new(3);
        let c2 = crate::constants::build_constants(3).unwrap().C2;
        let b = BubbleParams::new(0.01, vec![0.2, 0.0, 0.0]).unwrap();
        let pu = projected_bubble_ball(&b, &[0.0, 1.0, 0.0], &o, c2).unwrap();
        let u = bubble(&b, &[0.0, 1.0, 0.0], 3);
        assert!(pu.value <= 1e-3 * u);
        let far = projected_bubble_ball(
            &BubbleParams::new(0.1, vec![0.0; 3]).unwrap(),
            &[2.0, 0.0, 0.0],
            &o,
            c2,
        );
        assert!(far.is_ok());
        let bad = BubbleParams::new(0.1, vec![2.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            projected_bubble_ball(&bad, &[0.0; 3], &o, c2),
            Err(BubbleError::CenterOutside)
        );
    }

    #[test]
    fn decay_of_multiples() {
        let r: Vec<f64> = (0..50).map(|i| 0.3 * i as f64).collect();
        let u: Vec<f64> = r.iter().map(|&x| bubble_radial(4, 1.0, x)).collect();
        let d = decay_check(&r, &u, 4, 1.5);
        assert_relative_eq!(d.c_estimate, 1.0, max_relative = 1e-15);
        assert!(d.satisfied);
        let u2: Vec<f64> = u.iter().map(|v| 2.0 * v).collect();
        let d2 = decay_check(&r, &u2, 4, 1.5);
        assert_relative_eq!(d2.c_estimate, 2.0, max_relative = 1e-15);
        assert!(!d2.satisfied);
    }
}
