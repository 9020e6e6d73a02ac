//! Dense complex and real matrix algebra sized for desk-scale grids.
//!
//! Test systems stay under ~120 buses, so everything is dense. The complex
//! side carries the per-unit admittance/impedance algebra; the real side
//! backs the strength eigenvalue and the QP/LP kernels.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// All-zero `n` by `n` matrix.
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major slice; `data.len()` must be `n*n`.
    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension {
                context: "ComplexMatrix::from_rows",
                expected: n * n,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("ComplexMatrix", "non-finite entry"));
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Maximum absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        worst
    }

    /// 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `self * other`.
    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Extract the square sub-matrix with the given index set on both axes.
    pub fn principal_submatrix(&self, idx: &[usize]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(idx.len());
        for (ri, &r) in idx.iter().enumerate() {
            for (ci, &c) in idx.iter().enumerate() {
                out[(ri, ci)] = self[(r, c)];
            }
        }
        out
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<ComplexLu> {
        ComplexLu::factor(self)
    }

    /// Inverse with a 1-norm condition estimate. Fails when the condition
    /// estimate exceeds `cond_limit`.
    pub fn inverse_with_cond(&self, cond_limit: f64) -> Result<(ComplexMatrix, f64)> {
        let lu = self.lu().map_err(|_| Error::NoSynchronousSource {
            cond: f64::INFINITY,
        })?;
        let n = self.n;
        let mut inv = ComplexMatrix::zeros(n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            col[j] = Complex64::new(1.0, 0.0);
            lu.solve_in_place(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        let cond = self.norm_one() * inv.norm_one();
        if !cond.is_finite() || cond > cond_limit {
            return Err(Error::NoSynchronousSource { cond });
        }
        Ok((inv, cond))
    }

    /// Solve `self * x = b` for a single right-hand side.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let lu = self.lu()?;
        let mut x = b.to_vec();
        lu.solve_in_place(&mut x);
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular {
                context: "complex solve",
            });
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        let n = self.n;
        &mut self.data[i * n + j]
    }
}

/// LU factors of a [`ComplexMatrix`] with partial pivoting.
pub struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for i in (k + 1)..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular {
                    context: "complex LU",
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[k * n + j];
                    lu[i * n + j] -= sub;
                }
            }
        }
        Ok(ComplexLu { n, lu, perm })
    }

    /// Solve in place for one right-hand side (applies the row permutation).
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let permuted: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[i * n + j] * b[j];
                b[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let sub = self.lu[i * n + j] * b[j];
                b[i] -= sub;
            }
            b[i] /= self.lu[i * n + i];
        }
    }
}

/// Dense rectangular real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
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

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "RealMatrix::from_rows",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(RealMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = RealMatrix::zeros(self.rows, other.cols);
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

    /// Solve `self * x = b` by LU with partial pivoting (square only).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert!(self.is_square(), "solve needs a square matrix");
        let n = self.rows;
        if b.len() != n {
            return Err(Error::Dimension {
                context: "RealMatrix::solve",
                expected: n,
                got: b.len(),
            });
        }
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in (k + 1)..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { context: "real LU" });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let factor = a[i * n + k] / pivot;
                a[i * n + k] = factor;
                x[i] -= factor * x[k];
                for j in (k + 1)..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= a[i * n + j] * x[j];
            }
            x[i] /= a[i * n + i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular { context: "real LU" });
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a symmetric real matrix by cyclic Jacobi rotations,
/// returned in ascending order. Deterministic sweep order.
pub fn symmetric_eigenvalues(m: &RealMatrix) -> Result<Vec<f64>> {
    assert!(m.is_square(), "eigenvalues need a square matrix");
    let n = m.rows;
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("symmetric_eigenvalues", "non-finite entry"));
    }
    let mut a = m.clone();
    let scale: f64 = a
        .data
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
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
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_inverse_two_by_two() {
        let y = ComplexMatrix::from_rows(
            2,
            vec![c(0.0, -15.0), c(0.0, 10.0), c(0.0, 10.0), c(0.0, -10.0)],
        )
        .unwrap();
        let (z, _) = y.inverse_with_cond(1e12).unwrap();
        assert_abs_diff_eq!(z[(0, 0)].im, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(z[(0, 1)].im, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(z[(1, 1)].im, 0.3, epsilon = 1e-12);
        let id = z.matmul(&y);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(id[(i, j)].re, want, epsilon = 1e-12);
                assert_abs_diff_eq!(id[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        // Pure branch Laplacian (no shunt) is singular.
        let y = ComplexMatrix::from_rows(
            2,
            vec![c(0.0, -10.0), c(0.0, 10.0), c(0.0, 10.0), c(0.0, -10.0)],
        )
        .unwrap();
        assert!(y.inverse_with_cond(1e12).is_err());
    }

    #[test]
    fn real_solve_roundtrip() {
        let a = RealMatrix::from_rows(3, 3, vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0])
            .unwrap();
        let x = a.solve(&[1.0, 2.0, 3.0]).unwrap();
        let r: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[(i, j)] * x[j]).sum::<f64>())
            .collect();
        assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_matches_hand_eigenvalues() {
        let m = RealMatrix::from_rows(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = symmetric_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-10);
    }
}
