use super::GreenError;
use crate::numerics::{gauss_jacobi_symmetric, QuadratureRule};
use std::f64::consts::PI;

/// Product rule on the sphere `∂B(center, radius)` in `R^n`.
///
/// Polar angles `θ_1..θ_{n-2}` use Gauss-Jacobi in `t = cos θ_j` for the
/// weight `sin^{n-1-j} θ_j`; the azimuth uses the trapezoid rule with
/// `2*order` points.
#[derive(Debug, Clone)]
pub struct SphereRule {
    n: usize,
    center: Vec<f64>,
    radius: f64,
    polar: Vec<QuadratureRule>,
    azimuth: usize,
}

/// Builds the product rule; `order` is the number of nodes per polar angle.
pub fn sphere_quadrature(
    n: usize,
    center: &[f64],
    radius: f64,
    order: usize,
) -> Result<SphereRule, GreenError> {
    if !(3..=5).contains(&n) {
        return Err(GreenError::UnsupportedDimension(n));
    }
    if center.len() != n {
        return Err(GreenError::Dimension {
            expected: n,
            got: center.len(),
        });
    }
    let order = order.max(4);
    let polar = (1..=n - 2)
        .map(|j| gauss_jacobi_symmetric(order, 0.5 * (n - 2 - j) as f64))
        .collect();
    Ok(SphereRule {
        n,
        center: center.to_vec(),
        radius,
        polar,
        azimuth: 2 * order,
    })
}

/// One azimuthal circle of the rule, stored by coordinate: `points[k][i]` is
/// coordinate `k` of node `i`. All nodes on a ring share one weight.
#[derive(Debug, Clone)]
pub struct Ring {
    pub points: Vec<Vec<f64>>,
    pub normals: Vec<Vec<f64>>,
    pub weight: f64,
}

impl SphereRule {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.polar.iter().map(|r| r.len()).product::<usize>() * self.azimuth
    }

    /// Nodes per azimuthal circle.
    pub fn ring_len(&self) -> usize {
        self.azimuth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(point, outward_normal, weight)` for every node.
    pub fn for_each<F: FnMut(&[f64], &[f64], f64)>(&self, mut f: F) {
        let n = self.n;
        let np = n - 2;
        let mut idx = vec![0usize; np];
        let mut omega = vec![0.0; n];
        let mut point = vec![0.0; n];
        let dphi = 2.0 * PI / self.azimuth as f64;
        let rn1 = self.radius.powi(n as i32 - 1);
        let trig: Vec<(f64, f64)> = (0..self.azimuth)
            .map(|m| {
                let phi = dphi * m as f64;
                (phi.cos(), phi.sin())
            })
            .collect();
        loop {
            let mut w = rn1 * dphi;
            let mut sines = 1.0;
            for j in 0..np {
                let t = self.polar[j].nodes[idx[j]];
                w *= self.polar[j].weights[idx[j]];
                omega[j] = sines * t;
                sines *= (1.0 - t * t).max(0.0).sqrt();
            }
            for &(c, s) in &trig {
                omega[n - 2] = sines * c;
                omega[n - 1] = sines * s;
                for k in 0..n {
                    point[k] = self.center[k] + self.radius * omega[k];
                }
                f(&point, &omega, w);
            }
            let mut j = np;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < self.polar[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    /// Calls `f` once per azimuthal circle; same nodes and weights as
    /// [`SphereRule::for_each`], laid out for batch evaluation.
    pub fn for_each_ring<F: FnMut(&Ring)>(&self, mut f: F) {
        let n = self.n;
        let np = n - 2;
        let m = self.azimuth;
        let dphi = 2.0 * PI / m as f64;
        let rn1 = self.radius.powi(n as i32 - 1);
        let (cos, sin): (Vec<f64>, Vec<f64>) = (0..m)
            .map(|i| {
                let phi = dphi * i as f64;
                (phi.cos(), phi.sin())
            })
            .unzip();
        let mut ring = Ring {
            points: vec![vec![0.0; m]; n],
            normals: vec![vec![0.0; m]; n],
            weight: 0.0,
        };
        let mut idx = vec![0usize; np];
        loop {
            let mut w = rn1 * dphi;
            let mut sines = 1.0;
            for j in 0..np {
                let t = self.polar[j].nodes[idx[j]];
                w *= self.polar[j].weights[idx[j]];
                ring.normals[j].fill(sines * t);
                sines *= (1.0 - t * t).max(0.0).sqrt();
            }
            for i in 0..m {
                ring.normals[np][i] = sines * cos[i];
                ring.normals[np + 1][i] = sines * sin[i];
            }
            for k in 0..n {
                let (c, r) = (self.center[k], self.radius);
                for (p, v) in ring.points[k].iter_mut().zip(&ring.normals[k]) {
                    *p = c + r * v;
                }
            }
            ring.weight = w;
            f(&ring);
            let mut j = np;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < self.polar[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    /// Materialized `(point, weight)` list.
    pub fn nodes(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each(|x, _, w| out.push((x.to_vec(), w)));
        out
    }

    pub fn integrate<F: FnMut(&[f64], &[f64]) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        self.for_each(|x, nu, w| acc += w * f(x, nu));
        acc
    }
}
