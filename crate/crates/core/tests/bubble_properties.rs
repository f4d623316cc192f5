use lane_emden_spectra::bubbles::{
    beta_n, bubble, bubble_dlambda, bubble_dx, bubble_radial, bubble_radial_derivative,
    projected_bubble_ball, BubbleParams,
};
use lane_emden_spectra::constants::build_constants;
use lane_emden_spectra::green::{gamma_n, GreenOracle, UnitBallOracle};
use lane_emden_spectra::numerics::radial_integral;
use proptest::prelude::*;

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

proptest! {
    #[test]
    fn scaling_identity(n in 3usize..=6, lambda in 0.01..5.0f64, seed in point(6), c in point(6)) {
        let x = &seed[..n];
        let x0 = &c[..n];
        let b = BubbleParams::new(lambda, x0.to_vec()).unwrap();
        let y: Vec<f64> = x.iter().zip(x0).map(|(a, b)| (a - b) / lambda).collect();
        let lhs = bubble(&b, x, n);
        let rhs = lambda.powf(-0.5 * (n as f64 - 2.0)) * bubble(&BubbleParams::standard(n), &y, n);
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs());
    }

    #[test]
    fn dx_is_odd_in_its_coordinate(n in 3usize..=5, k in 0usize..3, x in point(5), lambda in 0.1..2.0f64) {
        let b = BubbleParams::new(lambda, vec![0.0; n]).unwrap();
        let mut y = x[..n].to_vec();
        let d = bubble_dx(&b, &y, k, n);
        y[k] = -y[k];
        prop_assert!((d + bubble_dx(&b, &y, k, n)).abs() <= 1e-14 * d.abs().max(1e-300));
    }

    #[test]
    fn derivatives_match_central_differences(n in 3usize..=5, x in point(5), lambda in 0.2..2.0f64, k in 0usize..3) {
        let x = &x[..n];
        let h = 1e-5;
        let b = BubbleParams::new(lambda, vec![0.1; n]).unwrap();
        let bp = BubbleParams::new(lambda + h, b.center.clone()).unwrap();
        let bm = BubbleParams::new(lambda - h, b.center.clone()).unwrap();
        let fd = (bubble(&bp, x, n) - bubble(&bm, x, n)) / (2.0 * h);
        let scale = bubble(&b, x, n) / lambda;
        prop_assert!((fd - bubble_dlambda(&b, x, n)).abs() <= 1e-7 * scale);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let fdx = (bubble(&b, &xp, n) - bubble(&b, &xm, n)) / (2.0 * h);
        prop_assert!((fdx - bubble_dx(&b, x, k, n)).abs() <= 1e-7 * scale);
    }
}

#[test]
fn energy_identity() {
    for n in 3..=6 {
        let nf = n as f64;
        let p = (nf + 2.0) / (nf - 2.0);
        let grad =
            radial_integral(|r| bubble_radial_derivative(n, 1.0, r).powi(2), n, 200).unwrap();
        let pot = radial_integral(|r| bubble_radial(n, 1.0, r).powf(p + 1.0), n, 200).unwrap();
        assert!((grad - pot).abs() <= 1e-8 * pot, "n={n}: {grad} vs {pot}");
    }
}

#[test]
fn dlambda_center_sign_and_fd() {
    let b = BubbleParams::standard(3);
    let h = 1e-6;
    let fd = (bubble(
        &BubbleParams::new(1.0 + h, vec![0.0; 3]).unwrap(),
        &[0.0; 3],
        3,
    ) - bubble(
        &BubbleParams::new(1.0 - h, vec![0.0; 3]).unwrap(),
        &[0.0; 3],
        3,
    )) / (2.0 * h);
    let an = bubble_dlambda(&b, &[0.0; 3], 3);
    assert!(an < 0.0);
    assert!((fd - an).abs() < 1e-8);
    assert!((an + 0.5 * beta_n(3)).abs() < 1e-14);
}

/// Max residual of `-w'' - (n-1)w'/r + l(l+n-2)w/r² - pU^{p-1}w` on a uniform grid.
fn kernel_residual(n: usize, l: usize, h: f64, w: impl Fn(f64) -> f64) -> f64 {
    let nf = n as f64;
    let p = (nf + 2.0) / (nf - 2.0);
    let ang = (l * (l + n - 2)) as f64;
    let mut worst: f64 = 0.0;
    let mut r = 0.25;
    while r <= 4.0 {
        let (wm, w0, wp) = (w(r - h), w(r), w(r + h));
        let lap = (wp - 2.0 * w0 + wm) / (h * h) + (nf - 1.0) / r * (wp - wm) / (2.0 * h);
        let res = -lap + ang / (r * r) * w0 - p * bubble_radial(n, 1.0, r).powf(p - 1.0) * w0;
        worst = worst.max(res.abs());
        r += 0.125;
    }
    worst
}

#[test]
fn kernel_directions_are_annihilated_under_refinement() {
    for n in 3..=5 {
        let a = 0.5 * (n as f64 - 2.0);
        let dil = |r: f64| r * bubble_radial_derivative(n, 1.0, r) + a * bubble_radial(n, 1.0, r);
        let trans = |r: f64| bubble_radial_derivative(n, 1.0, r);
        for (l, f) in [(0usize, &dil as &dyn Fn(f64) -> f64), (1, &trans)] {
            let r1 = kernel_residual(n, l, 1e-2, f);
            let r2 = kernel_residual(n, l, 5e-3, f);
            let r3 = kernel_residual(n, l, 2.5e-3, f);
            assert!(
                r2 < 0.3 * r1 && r3 < 0.3 * r2,
                "n={n} l={l}: {r1} {r2} {r3}"
            );
        }
    }
}

#[test]
fn projected_bubble_bounds() {
    for n in 3..=5 {
        let o = UnitBallOracle::new(n);
        let c2 = build_constants(n).unwrap().C2;
        let mut center = vec![0.0; n];
        center[0] = 0.3;
        for &lambda in &[0.05, 0.01] {
            let b = BubbleParams::new(lambda, center.clone()).unwrap();
            for i in 0..=20 {
                for j in 0..=8 {
                    let t = std::f64::consts::PI * j as f64 / 8.0;
                    let rad = i as f64 / 20.0;
                    let mut x = vec![0.0; n];
                    x[0] = rad * t.cos();
                    x[1] = rad * t.sin();
                    let pu = projected_bubble_ball(&b, &x, &o, c2).unwrap();
                    assert!(pu.value >= 0.0 && pu.value <= bubble(&b, &x, n));
                }
            }
        }
        let mut x = vec![0.0; n];
        x[1] = 0.5;
        let ratio = |lambda: f64| {
            let b = BubbleParams::new(lambda, center.clone()).unwrap();
            projected_bubble_ball(&b, &x, &o, c2).unwrap().value / bubble(&b, &x, n)
        };
        // Both U and the correction scale like λ^{(n-2)/2} away from the
        // center, so PU/U tends to G(x,x0)/(γ_n|x-x0|^{2-n}), not to 1.
        let d = x
            .iter()
            .zip(&center)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let limit = o.g(&x, &center) / (gamma_n(n) * d.powf(2.0 - n as f64));
        assert!((ratio(1e-3) - limit).abs() < (ratio(1e-2) - limit).abs());
        assert!((ratio(1e-4) - limit).abs() < 1e-6 * limit);
    }
}
