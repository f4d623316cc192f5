//! Browser bindings for three interactive views: a bubble profile against
//! its projection onto the unit ball, a slice of the ball's Green function,
//! and the radial lab's low spectrum at one ε.
//!
//! Each view is a plain Rust function returning JSON (or a flat array) so it
//! can be tested natively; the `#[wasm_bindgen]` wrappers only convert
//! errors into `JsError`.

use lane_emden_spectra::bubbles::{bubble, projected_bubble_ball, BubbleParams};
use lane_emden_spectra::constants::build_constants;
use lane_emden_spectra::green::{GreenOracle, UnitBallOracle};
use lane_emden_spectra::radial_lab::{sweep_point, SweepOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Dimensions the quadrature-backed modules support.
fn check_n(n: usize) -> Result<(), String> {
    if (3..=5).contains(&n) {
        Ok(())
    } else {
        Err(format!("n must be 3, 4 or 5, got {n}"))
    }
}

#[derive(Debug, Serialize)]
pub struct BubbleProfile {
    /// Sample positions along the first axis, from -1 to 1.
    pub x: Vec<f64>,
    pub bubble: Vec<f64>,
    pub projected: Vec<f64>,
    /// Where the projection hit the clamp at zero.
    pub clamped: Vec<bool>,
}

/// `U_{λ,ξ}` and its first-order projection along the first axis, with the
/// center `ξ = (offset, 0, …)`.
pub fn bubble_profile_data(
    n: usize,
    lambda: f64,
    offset: f64,
    samples: usize,
) -> Result<BubbleProfile, String> {
    check_n(n)?;
    if !(offset.abs() < 1.0) {
        return Err(format!("center offset must lie in (-1, 1), got {offset}"));
    }
    if samples < 2 {
        return Err("need at least 2 samples".into());
    }
    let table = build_constants(n).map_err(|e| e.to_string())?;
    let oracle = UnitBallOracle::new(n);
    let mut center = vec![0.0; n];
    center[0] = offset;
    let b = BubbleParams::new(lambda, center).map_err(|e| e.to_string())?;
    let mut out = BubbleProfile {
        x: Vec::with_capacity(samples),
        bubble: Vec::with_capacity(samples),
        projected: Vec::with_capacity(samples),
        clamped: Vec::with_capacity(samples),
    };
    let mut p = vec![0.0; n];
    for i in 0..samples {
        p[0] = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
        let pu = projected_bubble_ball(&b, &p, &oracle, table.C2).map_err(|e| e.to_string())?;
        out.x.push(p[0]);
        out.bubble.push(bubble(&b, &p, n));
        out.projected.push(pu.value);
        out.clamped.push(pu.clamped);
    }
    Ok(out)
}

/// `log10 G(x, y)` on a `size × size` grid over `[-1,1]²` in the
/// `(x_1, x_2)` plane, row-major with `x_2` decreasing down the rows.
/// Cells outside the ball, or at the pole, are `NaN`.
pub fn green_slice_data(n: usize, y1: f64, y2: f64, size: usize) -> Result<Vec<f64>, String> {
    check_n(n)?;
    if size < 2 {
        return Err("grid size must be at least 2".into());
    }
    if !(y1 * y1 + y2 * y2 < 1.0) {
        return Err(format!("pole ({y1}, {y2}) must lie inside the unit disk"));
    }
    let oracle = UnitBallOracle::new(n);
    let mut y = vec![0.0; n];
    y[0] = y1;
    y[1] = y2;
    let mut x = vec![0.0; n];
    let step = 2.0 / (size - 1) as f64;
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        x[1] = 1.0 - row as f64 * step;
        for col in 0..size {
            x[0] = -1.0 + col as f64 * step;
            let inside = x[0] * x[0] + x[1] * x[1] < 1.0;
            let at_pole = x[0] == y1 && x[1] == y2;
            out.push(if inside && !at_pole {
                oracle.g(&x, &y).log10()
            } else {
                f64::NAN
            });
        }
    }
    Ok(out)
}

/// Robin function `τ(x) = H(x, x)` at `(x_1, x_2, 0, …)`.
pub fn robin_data(n: usize, x1: f64, x2: f64) -> Result<f64, String> {
    check_n(n)?;
    if !(x1 * x1 + x2 * x2 < 1.0) {
        return Err("point must lie inside the unit disk".into());
    }
    let mut x = vec![0.0; n];
    x[0] = x1;
    x[1] = x2;
    Ok(UnitBallOracle::new(n).tau(&x))
}

#[derive(Debug, Serialize)]
pub struct Spectrum {
    pub epsilon: f64,
    pub lambda_hat: f64,
    pub morse_count: usize,
    pub mu1: f64,
    pub mu_l1: f64,
    pub mu_last: f64,
    pub mu_l2: f64,
    /// Mesh nodes and the solution, thinned for plotting.
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

/// Radial single-bubble solution and its low eigenvalues at one ε, on a
/// single mesh level.
pub fn radial_spectrum_data(n: usize, epsilon: f64, count: usize) -> Result<Spectrum, String> {
    check_n(n)?;
    if !(epsilon > 0.0 && epsilon <= 0.3) {
        return Err(format!("epsilon must lie in (0, 0.3], got {epsilon}"));
    }
    if !(40..=2000).contains(&count) {
        return Err(format!("mesh count must lie in 40..=2000, got {count}"));
    }
    let table = build_constants(n).map_err(|e| e.to_string())?;
    let mut opts = SweepOptions::new(n, vec![epsilon]);
    opts.core_count = count;
    opts.outer_count = count;
    opts.levels = 1;
    let s = sweep_point(&opts, &table, epsilon, None).map_err(|e| e.to_string())?;
    let stride = (s.finest.u.len() / 400).max(1);
    let (r, u) = s
        .finest
        .mesh
        .nodes
        .iter()
        .zip(&s.finest.u)
        .step_by(stride)
        .map(|(&r, &u)| (r, u))
        .unzip();
    Ok(Spectrum {
        epsilon,
        lambda_hat: s.point.lambda_hat,
        morse_count: s.point.morse_count,
        mu1: s.bands.mu1(),
        mu_l1: s.bands.mu_l1(),
        mu_last: s.bands.mu_last(),
        mu_l2: s.bands.l2_ground,
        r,
        u,
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn bubble_profile(n: usize, lambda: f64, offset: f64, samples: usize) -> Result<String, JsError> {
    let data = bubble_profile_data(n, lambda, offset, samples).map_err(|e| JsError::new(&e))?;
    to_json(&data)
}

#[wasm_bindgen]
pub fn green_slice(n: usize, y1: f64, y2: f64, size: usize) -> Result<Vec<f64>, JsError> {
    green_slice_data(n, y1, y2, size).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn robin(n: usize, x1: f64, x2: f64) -> Result<f64, JsError> {
    robin_data(n, x1, x2).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn radial_spectrum(n: usize, epsilon: f64, count: usize) -> Result<String, JsError> {
    let data = radial_spectrum_data(n, epsilon, count).map_err(|e| JsError::new(&e))?;
    to_json(&data)
}
