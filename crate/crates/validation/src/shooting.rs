//! Shooting oracle for the radial problem on the unit ball, written without
//! any code from the finite-volume lab.
//!
//! With `u(0) = 1` the solution of `-u'' - (n-1)u'/r = u^q` has a first zero
//! `R1`; the unit-ball solution is `R1^{2/(q-1)} u(R1 r)`, and the eigenvalues
//! of the linearization are invariant under that rescaling. Everything is
//! integrated by classical RK4 in `t = ln r` with `z = r u'`, `w = r v'`.

const T0: f64 = -9.0;

pub struct Shooting {
    pub n: usize,
    pub q: f64,
    /// `ln R1`.
    pub t_end: f64,
    pub steps: usize,
}

fn rhs(n: f64, q: f64, l: f64, mu: f64, t: f64, y: &[f64; 4]) -> [f64; 4] {
    let r2 = (2.0 * t).exp();
    let u = y[0].max(0.0);
    let uq1 = u.powf(q - 1.0);
    [
        y[1],
        -(n - 2.0) * y[1] - r2 * uq1 * y[0],
        y[3],
        -(n - 2.0) * y[3] + l * (l + n - 2.0) * y[2] - mu * q * r2 * uq1 * y[2],
    ]
}

fn rk4(n: f64, q: f64, l: f64, mu: f64, t: f64, h: f64, y: &[f64; 4]) -> [f64; 4] {
    let add = |a: &[f64; 4], b: &[f64; 4], s: f64| {
        [
            a[0] + s * b[0],
            a[1] + s * b[1],
            a[2] + s * b[2],
            a[3] + s * b[3],
        ]
    };
    let k1 = rhs(n, q, l, mu, t, y);
    let k2 = rhs(n, q, l, mu, t + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = rhs(n, q, l, mu, t + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = rhs(n, q, l, mu, t + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Series start at `r0 = e^{T0}`: `u ≈ 1 - r²/(2n)`, `v ≈ r^l (1 - c r²)`.
fn start(n: f64, q: f64, l: f64, mu: f64) -> [f64; 4] {
    let r = T0.exp();
    let r2 = r * r;
    let c = mu * q / (2.0 * (2.0 * l + n));
    [
        1.0 - r2 / (2.0 * n),
        -r2 / n,
        r.powf(l) * (1.0 - c * r2),
        r.powf(l) * (l - (l + 2.0) * c * r2),
    ]
}

impl Shooting {
    /// Locates `R1` with step `h` in `t`, then refines the last step by bisection.
    pub fn new(n: usize, eps: f64, h: f64) -> Self {
        let nf = n as f64;
        let q = (nf + 2.0) / (nf - 2.0) - eps;
        let mut t = T0;
        let mut y = start(nf, q, 0.0, 0.0);
        loop {
            let next = rk4(nf, q, 0.0, 0.0, t, h, &y);
            if next[0] <= 0.0 {
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if rk4(nf, q, 0.0, 0.0, t, mid, &y)[0] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_end = t + 0.5 * (lo + hi);
                let steps = ((t_end - T0) / h).ceil() as usize;
                return Shooting { n, q, t_end, steps };
            }
            y = next;
            t += h;
            assert!(t < 60.0, "no zero found");
        }
    }

    /// `u(0)` of the unit-ball solution.
    pub fn center_value(&self) -> f64 {
        self.t_end.exp().powf(2.0 / (self.q - 1.0))
    }

    /// Zeros of `v` on `(0, R1)` and the end value `v(R1)`.
    fn shoot(&self, l: usize, mu: f64) -> (usize, f64) {
        let nf = self.n as f64;
        let lf = l as f64;
        let h = (self.t_end - T0) / self.steps as f64;
        let mut y = start(nf, self.q, lf, mu);
        let mut zeros = 0;
        for k in 0..self.steps {
            let next = rk4(nf, self.q, lf, mu, T0 + k as f64 * h, h, &y);
            if (next[2] > 0.0) != (y[2] > 0.0) {
                zeros += 1;
            }
            y = next;
        }
        (zeros, y[2])
    }

    /// Eigenvalue number `k` (0-based) of sector `l`: the smallest `μ`
    /// where `v` acquires its `(k+1)`-th zero on `(0, R1]`.
    pub fn eigenvalue(&self, l: usize, k: usize, lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        assert!(
            self.shoot(l, lo).0 <= k && self.shoot(l, hi).0 > k,
            "bad bracket"
        );
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.shoot(l, mid).0 > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
