use super::newton::LinearSolve;
use super::NumericsError;
use serde::{Deserialize, Serialize};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn rows_vec(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols.max(1))
            .map(|c| c.to_vec())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense symmetric matrix; entries are stored symmetrized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct SymmetricMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds from a square dense matrix, replacing it by `(M + M^T)/2`.
    pub fn symmetrize(m: &DenseMatrix) -> Self {
        assert_eq!(m.rows, m.cols, "symmetric matrix must be square");
        let n = m.rows;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = m[(i, i)];
            for j in 0..i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        SymmetricMatrix { order: n, entries }
    }

    /// Builds from the lower triangle produced by `f(i, j)` with `j <= i`.
    pub fn from_lower<F: FnMut(usize, usize) -> f64>(order: usize, mut f: F) -> Self {
        let mut entries = vec![0.0; order * order];
        for i in 0..order {
            for j in 0..=i {
                let v = f(i, j);
                entries[i * order + j] = v;
                entries[j * order + i] = v;
            }
        }
        SymmetricMatrix { order, entries }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_lower(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn zeros(order: usize) -> Self {
        SymmetricMatrix {
            order,
            entries: vec![0.0; order * order],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.order,
            cols: self.order,
            data: self.entries.clone(),
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl From<SymmetricMatrix> for Vec<Vec<f64>> {
    fn from(m: SymmetricMatrix) -> Self {
        m.to_dense().rows_vec()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymmetricMatrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err("matrix is not square".into());
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(format!("entry ({i},{j}) is not symmetric"));
                }
            }
        }
        Ok(SymmetricMatrix {
            order: n,
            entries: rows.into_iter().flatten().collect(),
        })
    }
}

/// Eigenvalues ascending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver.
///
/// Each eigenvector is signed so that its largest entry is positive.
pub fn jacobi_eigen(m: &SymmetricMatrix, tol: f64) -> Result<Eigen, NumericsError> {
    let n = m.order();
    let mut a = m.to_dense();
    let mut v = DenseMatrix::identity(n);
    let norm = m.frobenius();
    let target = tol * norm;
    let off = |a: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    let mut converged = off(&a) <= target;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(NumericsError::JacobiNoConvergence(MAX_SWEEPS));
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off(&a) <= target;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut best = 0;
        for k in 0..n {
            if v[(k, src)].abs() > v[(best, src)].abs() + 1e-14 {
                best = k;
            }
        }
        let sign = if v[(best, src)] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[(k, col)] = sign * v[(k, src)];
        }
    }
    Ok(Eigen { values, vectors })
}

/// Cholesky factor `L` with `M = L L^T`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(m: &SymmetricMatrix) -> Result<Self, NumericsError> {
        let n = m.order();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m.get(j, j);
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(NumericsError::NotPositiveDefinite { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[(i, k)] * y[k];
            }
            y[i] /= self.l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[(k, i)] * y[k];
            }
            y[i] /= self.l[(i, i)];
        }
        y
    }

    /// `M^{-1} B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let x = self.solve(&b.column(j));
            for i in 0..b.rows {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
    condition_estimate: f64,
}

impl LuFactors {
    pub fn factor(m: &DenseMatrix) -> Self {
        assert_eq!(m.rows, m.cols);
        let n = m.rows;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(p, k)].abs() {
                    p = i;
                }
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let piv = lu[(k, k)];
            if piv == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        let pivots: Vec<f64> = (0..n).map(|i| lu[(i, i)].abs()).collect();
        let max = pivots.iter().cloned().fold(0.0, f64::max);
        let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition_estimate = if min == 0.0 { f64::INFINITY } else { max / min };
        LuFactors {
            lu,
            perm,
            condition_estimate,
        }
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }
}

impl LinearSolve for LuFactors {
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if !(self.condition_estimate < 1e14) {
            return Err(NumericsError::SingularJacobian(self.condition_estimate));
        }
        let n = self.lu.rows;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.lu[(i, k)] * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.lu[(i, k)] * y[k];
            }
            y[i] /= self.lu[(i, i)];
        }
        Ok(y)
    }
}

impl LinearSolve for DenseMatrix {
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, NumericsError> {
        LuFactors::factor(self).solve(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymmetricMatrix::from_lower(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn identity_spectrum() {
        let e = jacobi_eigen(&SymmetricMatrix::diagonal(&[1.0, 1.0, 1.0]), 1e-14).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.vectors, DenseMatrix::identity(3));
    }

    #[test]
    fn diagonal_is_sorted() {
        let e = jacobi_eigen(&SymmetricMatrix::diagonal(&[2.0, -1.0]), 1e-14).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0]);
        assert_eq!(e.vector(0), vec![0.0, 1.0]);
        assert_eq!(e.vector(1), vec![1.0, 0.0]);
    }

    #[test]
    fn random_six_by_six_reconstructs() {
        let m = random_symmetric(6, 7);
        let e = jacobi_eigen(&m, 1e-14).unwrap();
        let v = &e.vectors;
        let vtv = v.transpose().matmul(v);
        for i in 0..6 {
            for j in 0..6 {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - d).abs() < 1e-12);
            }
        }
        let lam = DenseMatrix::from_fn(6, 6, |i, j| if i == j { e.values[i] } else { 0.0 });
        let rec = v.matmul(&lam).matmul(&v.transpose());
        for i in 0..6 {
            for j in 0..6 {
                assert!((rec[(i, j)] - m.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_solves_and_rejects() {
        let m = SymmetricMatrix::from_lower(3, |i, j| if i == j { 4.0 } else { 1.0 });
        let c = Cholesky::factor(&m).unwrap();
        let x = c.solve(&[6.0, 6.0, 6.0]);
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-15);
        }
        let bad = SymmetricMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            Cholesky::factor(&bad),
            Err(NumericsError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn lu_with_pivoting() {
        let m = DenseMatrix {
            rows: 2,
            cols: 2,
            data: vec![0.0, 1.0, 2.0, 3.0],
        };
        let x = m.solve(&[1.0, 8.0]).unwrap();
        assert!((x[0] - 2.5).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let sing = DenseMatrix::zeros(2, 2);
        assert!(sing.solve(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn serde_roundtrip_symmetric() {
        let m = random_symmetric(3, 1);
        let rows: Vec<Vec<f64>> = m.clone().into();
        let back = SymmetricMatrix::try_from(rows).unwrap();
        assert_eq!(back, m);
        assert!(SymmetricMatrix::try_from(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }
}
