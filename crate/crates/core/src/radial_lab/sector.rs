use super::solve::{FiniteVolume, RadialSolution};
use super::LabError;
use crate::numerics::{tridiag_generalized_eigen, TridiagonalPencil};
use crate::reduction::Band;
use serde::{Deserialize, Serialize};

/// Dimension of the degree-`l` spherical harmonics on `S^{n-1}`:
/// `(2l+n-2)(l+n-3)!/(l!(n-2)!)`.
pub fn harmonic_multiplicity(n: usize, l: usize) -> usize {
    if l == 0 {
        return 1;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for k in 1..=l {
        num *= (n - 3 + k) as u128;
        den *= k as u128;
    }
    // num/den = (l+n-3)!/(l!(n-3)!)
    ((2 * l + n - 2) as u128 * (num / den) / (n - 2) as u128) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSpectrum {
    pub l: usize,
    pub multiplicity: usize,
    pub eigenvalues: Vec<f64>,
    /// Nodal arrays over the whole mesh, `B`-normalized, zero at `r = 1`
    /// (and at `r = 0` for `l ≥ 1`).
    pub eigenvectors: Vec<Vec<f64>>,
}

/// The sector pencil `A = tridiag(K) + l(l+n-2)P`, `B = q u^{q-1} V`
/// on the free nodes; `l ≥ 1` also pins the center node.
pub fn sector_pencil(
    sol: &RadialSolution,
    l: usize,
) -> Result<(TridiagonalPencil, usize), LabError> {
    let n = sol.params.n;
    let q = sol.params.q();
    let fv = FiniteVolume::new(&sol.mesh, n);
    let free = sol.u.len() - 1;
    let first = if l == 0 { 0 } else { 1 };
    let ang = (l * (l + n - 2)) as f64;
    let mut diag = Vec::with_capacity(free - first);
    let mut mass = Vec::with_capacity(free - first);
    for i in first..free {
        if !(sol.u[i] > 0.0) {
            return Err(LabError::NonPositive(i));
        }
        let left = if i == 0 { 0.0 } else { fv.k[i - 1] };
        diag.push(left + fv.k[i] + ang * fv.p[i]);
        mass.push(q * sol.u[i].powf(q - 1.0) * fv.v[i]);
    }
    let off: Vec<f64> = fv.k[first..free - 1].iter().map(|k| -k).collect();
    Ok((TridiagonalPencil::new(diag, off, mass)?, first))
}

pub fn sector_eigen(
    sol: &RadialSolution,
    l: usize,
    count: usize,
) -> Result<SectorSpectrum, LabError> {
    let (pencil, first) = sector_pencil(sol, l)?;
    let pairs = tridiag_generalized_eigen(&pencil, count)?;
    let total = sol.u.len();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut eigenvectors = Vec::with_capacity(count);
    for (mu, v) in pairs {
        let mut full = vec![0.0; total];
        full[first..first + v.len()].copy_from_slice(&v);
        eigenvalues.push(mu);
        eigenvectors.push(full);
    }
    Ok(SectorSpectrum {
        l,
        multiplicity: harmonic_multiplicity(sol.params.n, l),
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEntry {
    pub mu: f64,
    pub l: usize,
    pub radial_index: usize,
    pub band: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledBands {
    /// `μ_1 ≤ … ≤ μ_{n+2}` for one bubble.
    pub entries: Vec<BandEntry>,
    /// Ground value of the `l = 2` sector, which must exceed `μ_{n+2}`.
    pub l2_ground: f64,
    /// `μ_1 < μ_{l=1} < μ_{n+2} < μ_{l=2}`.
    pub ordering_ok: bool,
    /// `#{μ < 1}` over the computed sector eigenvalues, with multiplicity.
    pub morse_count: usize,
    pub anomalies: Vec<String>,
}

impl AssembledBands {
    pub fn mu1(&self) -> f64 {
        self.entries[0].mu
    }

    pub fn mu_l1(&self) -> f64 {
        self.entries[1].mu
    }

    pub fn mu_last(&self) -> f64 {
        self.entries[self.entries.len() - 1].mu
    }
}

/// Orders sectors 0, 1, 2 into the `(1, n, 1)` band pattern of one bubble.
pub fn assemble_bands(
    n: usize,
    l0: &SectorSpectrum,
    l1: &SectorSpectrum,
    l2: &SectorSpectrum,
) -> Result<AssembledBands, LabError> {
    if l0.eigenvalues.len() < 2 || l1.eigenvalues.is_empty() || l2.eigenvalues.is_empty() {
        return Err(LabError::Bands(
            "need two l=0 and one l=1, l=2 eigenvalue".into(),
        ));
    }
    let mut entries = vec![BandEntry {
        mu: l0.eigenvalues[0],
        l: 0,
        radial_index: 0,
        band: Band::FirstM,
    }];
    for _ in 0..l1.multiplicity {
        entries.push(BandEntry {
            mu: l1.eigenvalues[0],
            l: 1,
            radial_index: 0,
            band: Band::MiddleMn,
        });
    }
    entries.push(BandEntry {
        mu: l0.eigenvalues[1],
        l: 0,
        radial_index: 1,
        band: Band::LastM,
    });
    debug_assert_eq!(entries.len(), n + 2);
    let l2_ground = l2.eigenvalues[0];
    let mut anomalies = Vec::new();
    let (a, b, c) = (l0.eigenvalues[0], l1.eigenvalues[0], l0.eigenvalues[1]);
    if !(a < b && b < c) {
        anomalies.push(format!("band order violated: {a} {b} {c}"));
    }
    if !(l2_ground > c) {
        anomalies.push(format!(
            "l=2 ground {l2_ground} does not exceed mu_(n+2) = {c}"
        ));
    }
    let morse_count = [l0, l1, l2]
        .iter()
        .map(|s| s.multiplicity * s.eigenvalues.iter().filter(|&&m| m < 1.0).count())
        .sum();
    Ok(AssembledBands {
        entries,
        l2_ground,
        ordering_ok: anomalies.is_empty(),
        morse_count,
        anomalies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities() {
        assert_eq!(harmonic_multiplicity(3, 1), 3);
        assert_eq!(harmonic_multiplicity(3, 2), 5);
        assert_eq!(harmonic_multiplicity(4, 1), 4);
        assert_eq!(harmonic_multiplicity(4, 2), 9);
        assert_eq!(harmonic_multiplicity(5, 2), 14);
        assert_eq!(harmonic_multiplicity(5, 3), 30);
    }
}
