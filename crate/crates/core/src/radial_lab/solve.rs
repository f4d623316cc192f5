use super::mesh::RadialMesh;
use super::LabError;
use crate::bubbles::{beta_n, bubble_radial, ProblemParams};
use crate::constants::ConstantsTable;
use crate::green::gamma_n;
use crate::numerics::{damped_newton, LinearSolve, NewtonOptions, TridiagonalLu};
use serde::{Deserialize, Serialize};

/// Largest ε accepted by the radial solver.
pub const EPS_MAX: f64 = 0.3;
/// Sup-norm bound on the discrete residual of a returned solution.
pub const RESIDUAL_TOL: f64 = 1e-10;
const POLISH_STEPS: usize = 3;
const NORMALIZED_MAXIT: usize = 200;
/// Fewest nodes inside the concentration scale for an accepted solution;
/// below it the discrete problem has grid-scale spikes.
pub const MIN_SCALE_NODES: usize = 20;
/// Relative stopping level of the normalized iteration; the plain Newton on
/// `u` then brings the residual to `RESIDUAL_TOL`.
const NORMALIZED_TOL: f64 = 1e-9;

/// Finite-volume weights of a radial mesh with the factor `|S^{n-1}|` dropped.
///
/// Node `i` owns the shell between neighbouring midpoints: `V_i` is its
/// volume `∫ r^{n-1}`, `P_i = ∫ r^{n-3}` (angular potential) and `K_i` is the
/// conductance `r_{i+1/2}^{n-1}/(r_{i+1} - r_i)` between nodes `i` and `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteVolume {
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub k: Vec<f64>,
}

impl FiniteVolume {
    pub fn new(mesh: &RadialMesh, n: usize) -> Self {
        let r = &mesh.nodes;
        let nn = r.len() - 1;
        let nf = n as f64;
        let mid: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut v = Vec::with_capacity(nn + 1);
        let mut p = Vec::with_capacity(nn + 1);
        for i in 0..=nn {
            let lo = if i == 0 { 0.0 } else { mid[i - 1] };
            let hi = if i == nn { r[nn] } else { mid[i] };
            v.push((hi.powf(nf) - lo.powf(nf)) / nf);
            p.push((hi.powf(nf - 2.0) - lo.powf(nf - 2.0)) / (nf - 2.0));
        }
        let k = (0..nn)
            .map(|i| mid[i].powf(nf - 1.0) / (r[i + 1] - r[i]))
            .collect();
        FiniteVolume { v, p, k }
    }

    /// Discrete `-(r^{n-1}u')' - r^{n-1}u^q` at the free nodes, with `u_N = 0`.
    /// Returns NaN entries when some `u_i < 0`.
    pub fn residual(&self, u: &[f64], q: f64) -> Vec<f64> {
        let m = u.len();
        if u.iter().any(|&x| !(x >= 0.0)) {
            return vec![f64::NAN; m];
        }
        let at = |i: usize| if i < m { u[i] } else { 0.0 };
        (0..m)
            .map(|i| {
                let right = self.k[i] * (at(i + 1) - u[i]);
                let left = if i == 0 {
                    0.0
                } else {
                    self.k[i - 1] * (u[i] - u[i - 1])
                };
                -(right - left) - self.v[i] * u[i].powf(q)
            })
            .collect()
    }

    fn jacobian(&self, u: &[f64], q: f64) -> TridiagonalLu {
        let m = u.len();
        let diag: Vec<f64> = (0..m)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { self.k[i - 1] };
                left + self.k[i] - self.v[i] * q * u[i].max(0.0).powf(q - 1.0)
            })
            .collect();
        let off: Vec<f64> = self.k[..m - 1].iter().map(|k| -k).collect();
        TridiagonalLu::factor(&off, &diag, &off)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub params: ProblemParams,
    pub mesh: RadialMesh,
    /// Nodal values including `u(1) = 0`.
    pub u: Vec<f64>,
    pub lambda_hat: f64,
    pub amplitude_hat: f64,
    pub newton_residual: f64,
    pub newton_iterations: usize,
    pub decreasing_beyond_core: bool,
}

impl RadialSolution {
    /// Concentration scale `λ̂ ε^{α0}`.
    pub fn scale(&self) -> f64 {
        self.lambda_hat * self.params.epsilon.powf(self.params.alpha0)
    }

    pub fn at(&self, r: f64) -> f64 {
        self.mesh.interpolate(&self.u, r)
    }

    /// Discrete residual re-evaluated from the stored nodal values.
    pub fn residual_norm(&self) -> f64 {
        let fv = FiniteVolume::new(&self.mesh, self.params.n);
        let m = self.u.len() - 1;
        fv.residual(&self.u[..m], self.params.q())
            .iter()
            .fold(0.0, |a: f64, b| a.max(b.abs()))
    }
}

/// `λ0 = (C0/γ_n)^{1/(n-2)}`, the critical rate of one bubble at the ball center.
pub fn lambda0(table: &ConstantsTable) -> f64 {
    table.lambda_star(gamma_n(table.n))
}

/// Core width `8 λ0 ε^{α0}` used by the default mesh, capped at 0.25.
pub fn default_core_width(params: &ProblemParams, table: &ConstantsTable) -> f64 {
    (8.0 * lambda0(table) * params.epsilon.powf(params.alpha0)).min(0.25)
}

/// Projected bubble `U_μ - C2 μ^{(n-2)/2} γ_n`, clamped at 0, with `μ = λ0 ε^{α0}`.
pub fn projected_bubble_guess(
    params: &ProblemParams,
    mesh: &RadialMesh,
    table: &ConstantsTable,
) -> Vec<f64> {
    let n = params.n;
    let mu = lambda0(table) * params.epsilon.powf(params.alpha0);
    let shift = table.C2 * mu.powf(0.5 * (n as f64 - 2.0)) * gamma_n(n);
    mesh.nodes
        .iter()
        .map(|&r| (bubble_radial(n, mu, r) - shift).max(0.0))
        .collect()
}

/// Guess for `ε` from a solution at `ε_prev` by the blow-up scaling
/// `u(r) ≈ k^{σ} u_prev(k r)`, `k = (ε_prev/ε)^{α0}`.
pub fn continuation_guess(
    prev: &RadialSolution,
    params: &ProblemParams,
    mesh: &RadialMesh,
) -> Vec<f64> {
    let k = (prev.params.epsilon / params.epsilon).powf(params.alpha0);
    let amp = k.powf(params.sigma_eps);
    mesh.nodes
        .iter()
        .map(|&r| {
            if k * r >= 1.0 {
                0.0
            } else {
                amp * prev.at(k * r)
            }
        })
        .collect()
}

/// Damped Newton for the normalized form `K w = κ V w^q`, `w_0 = 1`; the
/// solution is `u = κ^{1/(q-1)} w`. Fixing `w_0` removes the near-degenerate
/// amplitude direction that stalls Newton on `u` from a mis-scaled guess.
fn normalized_newton(fv: &FiniteVolume, q: f64, guess: &[f64]) -> Result<Vec<f64>, LabError> {
    let m = guess.len();
    if !(guess[0] > 0.0) {
        return Err(LabError::NonPositive(0));
    }
    let mut w: Vec<f64> = guess.iter().map(|g| (g / guess[0]).max(0.0)).collect();
    let stiff = |w: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| {
                let right = if i + 1 < m { w[i + 1] } else { 0.0 };
                let left = if i == 0 {
                    0.0
                } else {
                    fv.k[i - 1] * (w[i] - w[i - 1])
                };
                -(fv.k[i] * (right - w[i])) + left
            })
            .collect()
    };
    let kw = stiff(&w);
    let mut kappa = w.iter().zip(&kw).map(|(a, b)| a * b).sum::<f64>()
        / w.iter()
            .zip(&fv.v)
            .map(|(a, v)| a * v * a.powf(q))
            .sum::<f64>();
    let merit = |w: &[f64], kappa: f64| -> (Vec<f64>, f64) {
        if w.iter().any(|&x| !(x >= 0.0)) || !(kappa > 0.0) {
            return (Vec::new(), f64::NAN);
        }
        let f: Vec<f64> = stiff(w)
            .iter()
            .zip(w)
            .zip(&fv.v)
            .map(|((kw, wi), v)| kw - kappa * v * wi.powf(q))
            .collect();
        let norm = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        (f, norm)
    };
    let (mut f, mut norm) = merit(&w, kappa);
    for _ in 0..NORMALIZED_MAXIT {
        if norm <= NORMALIZED_TOL * kappa {
            return Ok(w.iter().map(|x| x * kappa.powf(1.0 / (q - 1.0))).collect());
        }
        let diag: Vec<f64> = (0..m)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { fv.k[i - 1] };
                left + fv.k[i] - kappa * q * fv.v[i] * w[i].powf(q - 1.0)
            })
            .collect();
        let off: Vec<f64> = fv.k[..m - 1].iter().map(|k| -k).collect();
        let lu = TridiagonalLu::factor(&off, &diag, &off);
        let a = lu.solve(&f)?;
        let c: Vec<f64> = w.iter().zip(&fv.v).map(|(x, v)| -v * x.powf(q)).collect();
        let b = lu.solve(&c)?;
        let dk = -a[0] / b[0];
        let dw: Vec<f64> = a.iter().zip(&b).map(|(ai, bi)| -ai - dk * bi).collect();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=60 {
            let tw: Vec<f64> = w.iter().zip(&dw).map(|(x, d)| x + t * d).collect();
            let tk = kappa + t * dk;
            let (tf, tn) = merit(&tw, tk);
            if tn.is_finite() && tn < norm {
                w = tw;
                kappa = tk;
                f = tf;
                norm = tn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(LabError::Newton(format!(
                "normalized Newton stalled at residual {norm:e}"
            )));
        }
    }
    Err(LabError::Newton(format!(
        "normalized Newton exceeded {NORMALIZED_MAXIT} steps (residual {norm:e})"
    )))
}

/// Full Newton steps past the tolerance while the residual keeps dropping,
/// so that solutions reached from different guesses agree to rounding.
fn polish(fv: &FiniteVolume, q: f64, mut u: Vec<f64>, mut norm: f64) -> (Vec<f64>, f64) {
    for _ in 0..POLISH_STEPS {
        let f = fv.residual(&u, q);
        let Ok(dx) = fv.jacobian(&u, q).solve(&f) else {
            break;
        };
        let trial: Vec<f64> = u.iter().zip(&dx).map(|(a, d)| a - d).collect();
        let nt = fv
            .residual(&trial, q)
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        if !(nt < norm) {
            break;
        }
        u = trial;
        norm = nt;
    }
    (u, norm)
}

/// Damped Newton for `-u'' - (n-1)u'/r = u^{p-ε}`, `u'(0) = 0`, `u(1) = 0`.
pub fn solve_radial(
    params: &ProblemParams,
    mesh: &RadialMesh,
    guess: &[f64],
) -> Result<RadialSolution, LabError> {
    if !(params.epsilon > 0.0 && params.epsilon <= EPS_MAX) {
        return Err(LabError::Epsilon(params.epsilon));
    }
    if guess.len() != mesh.len() {
        return Err(LabError::Mesh(format!(
            "guess has {} values for {} nodes",
            guess.len(),
            mesh.len()
        )));
    }
    let fv = FiniteVolume::new(mesh, params.n);
    let q = params.q();
    let m = mesh.len() - 1;
    let x0 = normalized_newton(&fv, q, &guess[..m])?;
    let opts = NewtonOptions {
        tol: RESIDUAL_TOL,
        maxit: 200,
        max_halvings: 60,
    };
    let out = damped_newton(|u| fv.residual(u, q), |u| fv.jacobian(u, q), &x0, opts)
        .map_err(|e| LabError::Newton(e.to_string()))?;
    let (mut u, newton_residual) = polish(&fv, q, out.x, out.residual);
    if let Some(i) = u.iter().position(|&v| !(v > 0.0)) {
        return Err(LabError::NonPositive(i));
    }
    u.push(0.0);
    let nf = params.n as f64;
    let scale = (beta_n(params.n) / u[0]).powf(1.0 / params.sigma_eps);
    let lambda_hat = scale / params.epsilon.powf(params.alpha0);
    let amplitude_hat = scale.powf(0.5 * (nf - 2.0) - params.sigma_eps);
    let resolved = mesh.nodes.partition_point(|&r| r <= scale);
    if resolved < MIN_SCALE_NODES {
        return Err(LabError::Unresolved {
            scale,
            nodes: resolved,
        });
    }
    let core_end = mesh.core_count;
    let decreasing = u[core_end..].windows(2).all(|w| w[1] < w[0]);
    Ok(RadialSolution {
        params: *params,
        mesh: mesh.clone(),
        u,
        lambda_hat,
        amplitude_hat,
        newton_residual,
        newton_iterations: out.iterations,
        decreasing_beyond_core: decreasing,
    })
}

/// Solve from the projected bubble; on Newton failure, solve at `2ε` (capped
/// at `EPS_MAX`) on its own default mesh and continue back down.
pub fn solve_default(
    params: &ProblemParams,
    mesh: &RadialMesh,
    table: &ConstantsTable,
) -> Result<RadialSolution, LabError> {
    match solve_radial(params, mesh, &projected_bubble_guess(params, mesh, table)) {
        Err(LabError::Newton(_) | LabError::NonPositive(_) | LabError::Unresolved { .. })
            if params.epsilon < EPS_MAX =>
        {
            let up = ProblemParams::new(params.n, (2.0 * params.epsilon).min(EPS_MAX))
                .map_err(|e| LabError::Newton(e.to_string()))?;
            let up_mesh = RadialMesh::graded(
                default_core_width(&up, table),
                mesh.core_count,
                mesh.outer_count,
            )?;
            let prev = solve_default(&up, &up_mesh, table)?;
            solve_radial(params, mesh, &continuation_guess(&prev, params, mesh))
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::build_constants;

    #[test]
    fn volumes_sum_to_unit_ball() {
        let mesh = RadialMesh::graded(0.1, 50, 50).unwrap();
        for n in 3..=5 {
            let fv = FiniteVolume::new(&mesh, n);
            let total: f64 = fv.v.iter().sum();
            assert!((total - 1.0 / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn solves_and_extracts_rate() {
        let t = build_constants(4).unwrap();
        let params = ProblemParams::new(4, 0.1).unwrap();
        let mesh = RadialMesh::graded(default_core_width(&params, &t), 200, 200).unwrap();
        let sol =
            solve_radial(&params, &mesh, &projected_bubble_guess(&params, &mesh, &t)).unwrap();
        assert!(sol.residual_norm() <= RESIDUAL_TOL);
        assert!(sol.u.iter().take(sol.u.len() - 1).all(|&v| v > 0.0));
        assert_eq!(*sol.u.last().unwrap(), 0.0);
        assert!(sol.decreasing_beyond_core);
        assert!(sol.lambda_hat > 0.0);
        assert!((sol.amplitude_hat - 1.0).abs() < 0.2);
    }

    #[test]
    fn rejects_epsilon_out_of_range() {
        let t = build_constants(4).unwrap();
        let params = ProblemParams::new(4, 0.5).unwrap();
        let mesh = RadialMesh::graded(0.1, 40, 40).unwrap();
        let g = projected_bubble_guess(&params, &mesh, &t);
        assert!(matches!(
            solve_radial(&params, &mesh, &g),
            Err(LabError::Epsilon(_))
        ));
    }
}
