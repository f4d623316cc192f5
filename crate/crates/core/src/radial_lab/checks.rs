use super::sector::SectorSpectrum;
use super::solve::RadialSolution;
use crate::bubbles::{
    bubble_radial, bubble_radial_derivative, bubble_radial_dlambda, decay_check, DecayCheck,
};
use crate::constants::ConstantsTable;
use crate::green::gamma_n;
use serde::{Deserialize, Serialize};

/// Rescaled radius bound of the profile comparison.
pub const PROFILE_RADIUS: f64 = 10.0;
const PROFILE_SAMPLES: usize = 401;
/// Inner window `ρ ≤ 2` used to fit matching constants.
const FIT_RADIUS: f64 = 2.0;
/// Evaluation radius of the outer checks.
pub const OUTER_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    /// Sup distance of the normalized l=0 ground state to `U_{1,0}`.
    pub band1_distance: f64,
    /// Sup distance of the normalized l=1 ground state to `U'_{1,0}`.
    pub band2_distance: f64,
    /// Sup distance of the normalized second l=0 state to `∂_λU_{1,0}`.
    pub band3_distance: f64,
    pub band3_sign_changes: usize,
}

/// `f(ρ_k)` on `ρ ∈ [0, PROFILE_RADIUS]` for nodal values over the mesh.
fn rescaled(sol: &RadialSolution, values: &[f64], rho_max: f64, count: usize) -> Vec<(f64, f64)> {
    let s = sol.scale();
    (0..count)
        .map(|k| {
            let rho = rho_max * k as f64 / (count - 1) as f64;
            (rho, sol.mesh.interpolate(values, s * rho))
        })
        .collect()
}

fn normalized(values: &[f64]) -> Vec<f64> {
    let pivot = values
        .iter()
        .cloned()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if pivot == 0.0 {
        return values.to_vec();
    }
    values.iter().map(|v| v / pivot).collect()
}

/// Sup distance after normalizing both sides by their value at `argmax |·|`.
pub fn profile_distance(samples: &[(f64, f64)], reference: impl Fn(f64) -> f64) -> f64 {
    let a = normalized(&samples.iter().map(|s| s.1).collect::<Vec<_>>());
    let b = normalized(&samples.iter().map(|s| reference(s.0)).collect::<Vec<_>>());
    a.iter().zip(&b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Interior sign changes of a nodal vector, ignoring entries below
/// `1e-10·max|v|`.
pub fn sign_changes(v: &[f64]) -> usize {
    let floor = 1e-10 * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut last = 0.0;
    let mut count = 0;
    for &x in v {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}

pub fn eigenfunction_profiles(
    sol: &RadialSolution,
    l0: &SectorSpectrum,
    l1: &SectorSpectrum,
) -> ProfileReport {
    let n = sol.params.n;
    let band1 = rescaled(sol, &l0.eigenvectors[0], PROFILE_RADIUS, PROFILE_SAMPLES);
    let band2 = rescaled(sol, &l1.eigenvectors[0], PROFILE_RADIUS, PROFILE_SAMPLES);
    let band3 = rescaled(sol, &l0.eigenvectors[1], PROFILE_RADIUS, PROFILE_SAMPLES);
    ProfileReport {
        band1_distance: profile_distance(&band1, |r| bubble_radial(n, 1.0, r)),
        band2_distance: profile_distance(&band2, |r| bubble_radial_derivative(n, 1.0, r)),
        band3_distance: profile_distance(&band3, |r| bubble_radial_dlambda(n, 1.0, r)),
        band3_sign_changes: sign_changes(&l0.eigenvectors[1]),
    }
}

/// Least-squares `d` in `f(ρ) ≈ d·w(ρ)` over `ρ ≤ 2`.
fn fit_multiple(sol: &RadialSolution, values: &[f64], w: impl Fn(f64) -> f64) -> f64 {
    let samples = rescaled(sol, values, FIT_RADIUS, 201);
    let (num, den) = samples.iter().fold((0.0, 0.0), |(a, b), &(r, f)| {
        let wr = w(r);
        (a + f * wr, b + wr * wr)
    });
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterReport {
    /// `ε^{-1/2} u(0.5) / (C2 λ̂^{(n-2)/2} G(0.5e1, 0))`.
    pub u_ratio: f64,
    /// Band-2 field against `C1 λ̂^{n-1} d ∂G/∂y_1`, prefactor `ε^{-(n-1)/(n-2)}`.
    pub band2_ratio: f64,
    /// Band-3 field against `C3 d λ̂^{n-2} G`, prefactor `ε^{-1}`.
    pub band3_ratio: f64,
    /// `v(0.5) + v(-0.5)` relative to `|v(0.5)|` for the band-2 field, which is odd.
    pub band2_odd_defect: f64,
    pub d_band2: f64,
    pub d_band3: f64,
}

/// `G(x, 0) = γ_n(|x|^{2-n} - 1)` on the unit ball.
fn green_center(n: usize, r: f64) -> f64 {
    gamma_n(n) * (r.powf(2.0 - n as f64) - 1.0)
}

/// `∂G/∂y_1(x, 0) = (n-2)γ_n x_1(|x|^{-n} - 1)` at `x = r e1`.
fn green_center_dy(n: usize, r: f64) -> f64 {
    (n as f64 - 2.0) * gamma_n(n) * r * (r.powf(-(n as f64)) - 1.0)
}

pub fn outer_limits_check(
    sol: &RadialSolution,
    l0: &SectorSpectrum,
    l1: &SectorSpectrum,
    table: &ConstantsTable,
) -> OuterReport {
    let n = sol.params.n;
    let nf = n as f64;
    let eps = sol.params.epsilon;
    let lam = sol.lambda_hat;
    let r = OUTER_RADIUS;
    let u_ratio =
        eps.powf(-0.5) * sol.at(r) / (table.C2 * lam.powf(0.5 * (nf - 2.0)) * green_center(n, r));

    let v2 = &l1.eigenvectors[0];
    let d2 = -fit_multiple(sol, v2, |rho| bubble_radial_derivative(n, 1.0, rho));
    // The l=1 field is f(|x|) x_1/|x|; at x = ±r e1 it equals ±f(r).
    let f2 = sol.mesh.interpolate(v2, r);
    let band2_ratio = eps.powf(-(nf - 1.0) / (nf - 2.0)) * f2
        / (table.C1 * lam.powf(nf - 1.0) * d2 * green_center_dy(n, r));
    let odd = (f2 + (-f2)).abs() / f2.abs().max(f64::MIN_POSITIVE);

    let v3 = &l0.eigenvectors[1];
    let d3 = fit_multiple(sol, v3, |rho| bubble_radial_dlambda(n, 1.0, rho));
    let band3_ratio = sol.mesh.interpolate(v3, r)
        / (eps * table.C3 * d3 * lam.powf(nf - 2.0) * green_center(n, r));

    OuterReport {
        u_ratio,
        band2_ratio,
        band3_ratio,
        band2_odd_defect: odd,
        d_band2: d2,
        d_band3: d3,
    }
}

/// Decay diagnostic of `ũ(ρ) = s^{σ_ε} u(sρ)` over the mesh nodes.
pub fn solution_decay(sol: &RadialSolution, cap: f64) -> DecayCheck {
    let s = sol.scale();
    let amp = s.powf(sol.params.sigma_eps);
    let m = sol.u.len() - 1;
    let radii: Vec<f64> = sol.mesh.nodes[..m].iter().map(|r| r / s).collect();
    let values: Vec<f64> = sol.u[..m].iter().map(|u| amp * u).collect();
    decay_check(&radii, &values, sol.params.n, cap)
}
