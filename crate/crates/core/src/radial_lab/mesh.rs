use super::LabError;
use serde::{Deserialize, Serialize};

/// Largest admissible ratio of neighbouring cell widths.
pub const MAX_GROWTH: f64 = 1.15;

/// Graded mesh of `[0, 1]`: nearly uniform on `[0, coreWidth]`, geometric
/// beyond it.
///
/// Nodes are `r(s_j)` for `s_j = j/N` with
/// `r(s) ∝ s + (e^{κ(s-s_c)} - e^{-κ s_c})/κ`, `s_c = coreCount/N`, and `κ`
/// chosen so that `r(s_c) = coreWidth`. Scaling both counts by the same
/// integer keeps `s_c` and `κ`, so refined meshes are nested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMesh {
    pub nodes: Vec<f64>,
    pub core_width: f64,
    pub core_count: usize,
    pub outer_count: usize,
    pub kappa: f64,
}

fn shape(s: f64, sc: f64, k: f64) -> f64 {
    s + ((k * (s - sc)).exp() - (-k * sc).exp()) / k
}

impl RadialMesh {
    pub fn graded(
        core_width: f64,
        core_count: usize,
        outer_count: usize,
    ) -> Result<Self, LabError> {
        if !(core_width > 0.0 && core_width < 0.5) || core_count < 2 || outer_count < 2 {
            return Err(LabError::Mesh(format!(
                "core width {core_width} and counts {core_count}/{outer_count} are not admissible"
            )));
        }
        let total = core_count + outer_count;
        let sc = core_count as f64 / total as f64;
        let frac = |k: f64| shape(sc, sc, k) / shape(1.0, sc, k);
        // frac decreases from ~ (sc + sc)/(1 + ...) toward 0 as κ grows.
        let (mut lo, mut hi) = (1e-8, 1.0);
        while frac(hi) > core_width {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(LabError::Mesh(format!(
                    "core width {core_width} is too small"
                )));
            }
        }
        if frac(lo) < core_width {
            return Err(LabError::Mesh(format!(
                "core width {core_width} is too large"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if frac(mid) > core_width {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let kappa = 0.5 * (lo + hi);
        let scale = shape(1.0, sc, kappa);
        let mut nodes: Vec<f64> = (0..=total)
            .map(|j| shape(j as f64 / total as f64, sc, kappa) / scale)
            .collect();
        nodes[0] = 0.0;
        nodes[total] = 1.0;
        let mesh = RadialMesh {
            nodes,
            core_width,
            core_count,
            outer_count,
            kappa,
        };
        mesh.check()?;
        Ok(mesh)
    }

    /// Same core width with both counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self, LabError> {
        Self::graded(
            self.core_width,
            self.core_count * factor,
            self.outer_count * factor,
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_growth(&self) -> f64 {
        self.nodes
            .windows(3)
            .map(|w| (w[2] - w[1]) / (w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    fn check(&self) -> Result<(), LabError> {
        if self.nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::Mesh("nodes are not strictly increasing".into()));
        }
        let first = self.nodes[1] - self.nodes[0];
        if first > self.core_width / self.core_count as f64 {
            return Err(LabError::Mesh(format!(
                "first cell {first:e} exceeds core spacing"
            )));
        }
        let g = self.max_growth();
        if g > MAX_GROWTH {
            return Err(LabError::Mesh(format!(
                "growth ratio {g:.4} exceeds {MAX_GROWTH}; increase outerCount"
            )));
        }
        Ok(())
    }

    /// Linear interpolation of nodal values at `r`; zero beyond the last node.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let x = &self.nodes;
        if r <= 0.0 {
            return values[0];
        }
        if r >= x[x.len() - 1] {
            return values[x.len() - 1];
        }
        let j = x.partition_point(|&v| v <= r) - 1;
        let t = (r - x[j]) / (x[j + 1] - x[j]);
        values[j] * (1.0 - t) + values[j + 1] * t
    }
}
