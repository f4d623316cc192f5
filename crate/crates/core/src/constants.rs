//! Integral constants of the bubble, each evaluated twice: by radial
//! quadrature and by the Beta-function identity
//! `∫_0^∞ r^{a-1}(1+r²)^{-b} dr = ½B(a/2, b-a/2)`.

use crate::bubbles::{beta_n, bubble_radial, bubble_radial_derivative, bubble_radial_dlambda};
use crate::green::gamma_n;
use crate::numerics::{beta, radial_integral, sphere_area, NumericsError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative agreement required between the two evaluations.
pub const DUAL_TOLERANCE: f64 = 1e-8;
/// Gauss-Legendre order of the radial quadrature.
pub const RADIAL_ORDER: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error("dimension {0} is below 3")]
    Dimension(usize),
    #[error("{name}: quadrature {quadrature:e} and closed form {closed_form:e} disagree")]
    Inconsistent {
        name: String,
        quadrature: f64,
        closed_form: f64,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualEvaluation {
    pub name: String,
    pub quadrature: f64,
    pub closed_form: f64,
    pub relative_difference: f64,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub n: usize,
    pub p: f64,
    pub beta_n: f64,
    pub gamma_n: f64,
    pub sphere_area: f64,
    /// `∫U^{p+1}`.
    pub int_u_p1: f64,
    /// `(∫U^p)²`.
    pub c1_energy: f64,
    /// `(n-2)²/(4n) ∫U^{p+1}`.
    pub c2_energy: f64,
    /// `c2_energy/(c1_energy (n-2))`.
    pub C0: f64,
    /// `β_n^p (n+2)/n ∫|x|²(1+|x|²)^{-(n+4)/2}`.
    pub C1: f64,
    /// `∫U^p`.
    pub C2: f64,
    /// `p∫U^{p-1}∂_λU`.
    pub C3: f64,
    /// `∫U^{p-1}(∂_λU)²`.
    pub C4: f64,
    /// `∫U^{p-1}(∂_{x_1}U)²`.
    pub C5: f64,
    /// `C1 C2/(p C5)`.
    pub c0_spec: f64,
    /// `(n-2)² C2 C3/(2(n+2) C4)`.
    pub c1_spec: f64,
    /// `((n-2)/(n+2))²`.
    pub b1_base: f64,
    pub dual_evaluations: Vec<DualEvaluation>,
}

/// `½B(a/2, b - a/2)`.
fn beta_moment(a: f64, b: f64) -> f64 {
    0.5 * beta(0.5 * a, b - 0.5 * a)
}

fn dual(name: &str, quadrature: f64, closed_form: f64) -> Result<DualEvaluation, ConstantsError> {
    let rel = (quadrature - closed_form).abs() / closed_form.abs();
    if !(rel <= DUAL_TOLERANCE) {
        return Err(ConstantsError::Inconsistent {
            name: name.to_string(),
            quadrature,
            closed_form,
        });
    }
    Ok(DualEvaluation {
        name: name.to_string(),
        quadrature,
        closed_form,
        relative_difference: rel,
    })
}

pub fn build_constants(n: usize) -> Result<ConstantsTable, ConstantsError> {
    if n < 3 {
        return Err(ConstantsError::Dimension(n));
    }
    let nf = n as f64;
    let p = (nf + 2.0) / (nf - 2.0);
    let a = 0.5 * (nf - 2.0);
    let bn = beta_n(n);
    let area = sphere_area(n);
    let u = |r: f64| bubble_radial(n, 1.0, r);
    let du = |r: f64| bubble_radial_derivative(n, 1.0, r);
    let dl = |r: f64| bubble_radial_dlambda(n, 1.0, r);
    let k = RADIAL_ORDER;

    let int_u_p1 = dual(
        "int_U^{p+1}",
        radial_integral(|r| u(r).powf(p + 1.0), n, k)?,
        bn.powf(p + 1.0) * area * beta_moment(nf, nf),
    )?;
    let c2 = dual(
        "C2",
        radial_integral(|r| u(r).powf(p), n, k)?,
        bn.powf(p) * area * beta_moment(nf, 0.5 * (nf + 2.0)),
    )?;
    let c1 = dual(
        "C1",
        radial_integral(|r| r * r * (1.0 + r * r).powf(-0.5 * (nf + 4.0)), n, k)?
            * bn.powf(p)
            * (nf + 2.0)
            / nf,
        bn.powf(p) * (nf + 2.0) / nf * area * beta_moment(nf + 2.0, 0.5 * (nf + 4.0)),
    )?;
    let c3 = dual(
        "C3",
        p * radial_integral(|r| u(r).powf(p - 1.0) * dl(r), n, k)?,
        p * a
            * bn.powf(p)
            * area
            * (beta_moment(nf, 0.5 * (nf + 2.0)) - 2.0 * beta_moment(nf, 0.5 * (nf + 4.0))),
    )?;
    let c4 = dual(
        "C4",
        radial_integral(|r| u(r).powf(p - 1.0) * dl(r) * dl(r), n, k)?,
        a * a
            * bn.powf(p + 1.0)
            * area
            * (beta_moment(nf, nf) - 4.0 * beta_moment(nf, nf + 1.0)
                + 4.0 * beta_moment(nf, nf + 2.0)),
    )?;
    let c5 = dual(
        "C5",
        radial_integral(|r| u(r).powf(p - 1.0) * du(r) * du(r), n, k)? / nf,
        (nf - 2.0).powi(2) * bn.powf(p + 1.0) / nf * area * beta_moment(nf + 2.0, nf + 2.0),
    )?;

    let int_p1 = int_u_p1.closed_form;
    let (c1v, c2v, c3v, c4v, c5v) = (
        c1.closed_form,
        c2.closed_form,
        c3.closed_form,
        c4.closed_form,
        c5.closed_form,
    );
    let c1_energy = c2v * c2v;
    let c2_energy = (nf - 2.0).powi(2) / (4.0 * nf) * int_p1;
    Ok(ConstantsTable {
        n,
        p,
        beta_n: bn,
        gamma_n: gamma_n(n),
        sphere_area: area,
        int_u_p1: int_p1,
        c1_energy,
        c2_energy,
        C0: c2_energy / (c1_energy * (nf - 2.0)),
        C1: c1v,
        C2: c2v,
        C3: c3v,
        C4: c4v,
        C5: c5v,
        c0_spec: c1v * c2v / (p * c5v),
        c1_spec: (nf - 2.0).powi(2) * c2v * c3v / (2.0 * (nf + 2.0) * c4v),
        // one rounding, so n = 3 gives the double nearest 0.04
        b1_base: (nf - 2.0).powi(2) / (nf + 2.0).powi(2),
        dual_evaluations: vec![int_u_p1, c1, c2, c3, c4, c5],
    })
}

/// First-band slope `b1 = b1_base + (n-2)³c1/(4n(n+2)c2) ρ¹`.
pub fn b1(table: &ConstantsTable, rho1: f64) -> f64 {
    let nf = table.n as f64;
    table.b1_base
        + (nf - 2.0).powi(3) * table.c1_energy / (4.0 * nf * (nf + 2.0) * table.c2_energy) * rho1
}

impl ConstantsTable {
    /// Critical rate of a single bubble where the Robin function equals `tau`:
    /// `λ^{n-2} τ = C0`.
    pub fn lambda_star(&self, tau: f64) -> f64 {
        (self.C0 / tau).powf(1.0 / (self.n as f64 - 2.0))
    }

    pub fn all_positive(&self) -> bool {
        [
            self.beta_n,
            self.gamma_n,
            self.sphere_area,
            self.c1_energy,
            self.c2_energy,
            self.C0,
            self.C1,
            self.C2,
            self.C3,
            self.C4,
            self.C5,
            self.c0_spec,
            self.c1_spec,
            self.b1_base,
        ]
        .iter()
        .all(|v| *v > 0.0)
    }
}
