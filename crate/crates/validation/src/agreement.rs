//! The finite-volume lab against the shooting oracle.

use crate::Shooting;
use lane_emden_spectra::bubbles::{beta_n, ProblemParams};
use lane_emden_spectra::constants::build_constants;
use lane_emden_spectra::radial_lab::{
    default_core_width, lambda0, solve_default, sweep_point, RadialMesh, RadialSolution,
    SweepOptions,
};

fn solve_direct(n: usize, eps: f64) -> RadialSolution {
    let t = build_constants(n).unwrap();
    let params = ProblemParams::new(n, eps).unwrap();
    let mesh = RadialMesh::graded(default_core_width(&params, &t), 400, 400).unwrap();
    solve_default(&params, &mesh, &t).unwrap()
}

#[test]
fn shooting_ground_state_is_exact() {
    for (n, eps) in [(3, 0.05), (4, 0.025), (5, 0.1)] {
        let s = Shooting::new(n, eps, 2e-4);
        assert!((s.eigenvalue(0, 0, 0.05, 0.95) - 1.0 / s.q).abs() < 1e-12);
    }
}

#[test]
fn extrapolated_eigenvalues_match_shooting() {
    let t = build_constants(4).unwrap();
    let opts = SweepOptions::new(4, vec![0.05]);
    for eps in [0.05, 0.0125] {
        let p = sweep_point(&opts, &t, eps, None).unwrap().point;
        let s = Shooting::new(4, eps, 2e-4);
        let mu1 = s.eigenvalue(0, 0, 0.1, 0.9);
        let mul1 = s.eigenvalue(1, 0, 0.9, 1.5);
        let mulast = s.eigenvalue(0, 1, 0.9, 1.5);
        assert!(
            (p.mu.mu1 - mu1).abs() < 1e-8,
            "eps={eps}: {} vs {mu1}",
            p.mu.mu1
        );
        assert!(
            (p.mu.mu_l1 - mul1).abs() < 1e-8,
            "eps={eps}: {} vs {mul1}",
            p.mu.mu_l1
        );
        assert!(
            (p.mu.mu_last - mulast).abs() < 1e-8,
            "eps={eps}: {} vs {mulast}",
            p.mu.mu_last
        );
    }
}

#[test]
fn other_dimensions_match_shooting() {
    for (n, eps) in [(3, 0.05), (5, 0.05)] {
        let t = build_constants(n).unwrap();
        let p = sweep_point(&SweepOptions::new(n, vec![eps]), &t, eps, None)
            .unwrap()
            .point;
        let s = Shooting::new(n, eps, 2e-4);
        let mul1 = s.eigenvalue(1, 0, 0.5, 1.5);
        let mulast = s.eigenvalue(0, 1, 0.5, 1.5);
        assert!(
            (p.mu.mu_l1 - mul1).abs() < 1e-7,
            "n={n}: {} vs {mul1}",
            p.mu.mu_l1
        );
        assert!(
            (p.mu.mu_last - mulast).abs() < 1e-7,
            "n={n}: {} vs {mulast}",
            p.mu.mu_last
        );
    }
}

#[test]
fn rate_from_center_value_matches_shooting() {
    let sol = solve_direct(4, 0.05);
    let s = Shooting::new(4, 0.05, 2e-4);
    let rel = (sol.u[0] - s.center_value()).abs() / s.center_value();
    assert!(rel < 1e-3, "u(0) {} vs {}", sol.u[0], s.center_value());
    let scale = (beta_n(4) / s.center_value()).powf(1.0 / sol.params.sigma_eps);
    let expect = scale / 0.05f64.sqrt();
    assert!((sol.lambda_hat - expect).abs() / expect < 1e-3);
}

#[test]
fn rate_approaches_sqrt_two_times_lambda0() {
    // The measured rate sits near √2·λ0 rather than λ0.
    let t = build_constants(4).unwrap();
    let l0 = lambda0(&t);
    let ratios: Vec<f64> = [0.05, 0.0125, 0.003125]
        .iter()
        .map(|&e| Shooting::new(4, e, 4e-4))
        .map(|s| {
            let sigma = 2.0 / (2.0 - (3.0 - s.q));
            (beta_n(4) / s.center_value()).powf(1.0 / sigma) / (3.0 - s.q).sqrt() / l0
        })
        .collect();
    assert!(
        ratios
            .windows(2)
            .all(|w| (w[1] - 2f64.sqrt()).abs() < (w[0] - 2f64.sqrt()).abs()),
        "{ratios:?}"
    );
    assert!((ratios[2] - 2f64.sqrt()).abs() < 0.01, "{ratios:?}");
    let sol = solve_direct(4, 0.05);
    assert!((sol.lambda_hat / l0 - ratios[0]).abs() < 1e-3);
}
