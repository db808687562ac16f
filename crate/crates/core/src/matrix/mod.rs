//! Dense complex linear algebra.
//!
//! Matrices are stored row-major. Every structured type (Hermitian, positive
//! definite, density, unitary) validates its invariant on construction and is
//! immutable afterwards.

mod eig;
mod hermitian;
mod io;
mod random;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eig::eig_hermitian;
pub use hermitian::{
    matrix_function, DensityMatrix, Domain, HermitianMatrix, PositiveDefiniteMatrix, Spectrum,
    UnitaryMatrix,
};
pub use io::MatrixFile;
pub use random::{
    ginibre, random_density, random_density_with, random_haar_unitary, random_haar_unitary_with,
    random_hermitian, random_hermitian_with, random_positive_definite,
    random_positive_definite_with,
};

pub type C64 = Complex64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// A dense `rows x cols` complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting bad lengths and non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::mismatch("from_row_major", rows * cols, data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row vectors (test and example convenience).
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        Self::from_row_major(
            r,
            c,
            rows.iter()
                .flat_map(|row| row.iter().map(|&x| c64(x, 0.0)))
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |r, c| {
            if r == c {
                c64(diag[r], 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
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

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ||self - other||_F.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "distance: shape mismatch"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Matrix product with a shape check.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::mismatch(
                "matmul",
                format!("lhs cols = rhs rows = {}", self.cols),
                rhs.rows,
            ));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let (n, m, p) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![C64::new(0.0, 0.0); n * p];
        for i in 0..n {
            let row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rrow = &rhs.data[k * p..(k + 1) * p];
                for (o, b) in row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Self {
            rows: n,
            cols: p,
            data: out,
        }
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, rhs.rows, rhs.cols);
        Self::from_fn(r1 * r2, c1 * c2, |r, c| {
            self[(r / r2, c / c2)] * rhs[(r % r2, c % c2)]
        })
    }

    /// Partial trace over one factor of a square matrix on `C^n ⊗ C^m`.
    ///
    /// `factor = 1` traces out the first (`n`-dimensional) factor and returns an
    /// `m x m` matrix; `factor = 2` traces out the second and returns `n x n`.
    pub fn partial_trace(&self, factor: u8, dims: (usize, usize)) -> Result<Self> {
        let (n, m) = dims;
        if !self.is_square() || self.rows != n * m {
            return Err(Error::mismatch(
                "partial_trace",
                format!("square of dimension {}", n * m),
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        match factor {
            1 => Ok(Self::from_fn(m, m, |a, b| {
                (0..n).map(|i| self[(i * m + a, i * m + b)]).sum()
            })),
            2 => Ok(Self::from_fn(n, n, |i, j| {
                (0..m).map(|a| self[(i * m + a, j * m + a)]).sum()
            })),
            other => Err(Error::InvalidParameter(format!(
                "partial trace factor must be 1 or 2, got {other}"
            ))),
        }
    }

    /// Block-diagonal matrix `diag(self, rhs)`.
    pub fn direct_sum(&self, rhs: &Self) -> Self {
        let (r, c) = (self.rows + rhs.rows, self.cols + rhs.cols);
        Self::from_fn(r, c, |i, j| {
            if i < self.rows && j < self.cols {
                self[(i, j)]
            } else if i >= self.rows && j >= self.cols {
                rhs[(i - self.rows, j - self.cols)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `self * rhs - rhs * self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(&self.matmul(rhs)? - &rhs.matmul(self)?)
    }

    /// Largest |M_ij - conj(M_ji)|.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::mismatch(
                "inverse of a non-square matrix",
                self.rows,
                self.cols,
            ));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .expect("non-empty range");
            if a[(pivot, col)].norm() <= 1e-14 * scale {
                return Err(Error::Numerical(
                    "matrix is singular to working precision".into(),
                ));
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let d = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] *= d;
                inv[(col, j)] *= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let (av, iv) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] -= f * av;
                    inv[(r, j)] -= f * iv;
                }
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix sum shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix difference shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// `A ⊗ B`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Partial trace of `m` over `factor` (1 or 2) of `C^n ⊗ C^m`.
pub fn partial_trace(m: &ComplexMatrix, factor: u8, dims: (usize, usize)) -> Result<ComplexMatrix> {
    m.partial_trace(factor, dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_matrix(n: usize, m: usize, seed: u64) -> ComplexMatrix {
        let mut rng = crate::rng::rng_from_seed(seed);
        ginibre(n, m, &mut rng)
    }

    #[test]
    fn inverse_round_trip() {
        let m = rand_matrix(5, 5, 31);
        let prod = m.matmul(&m.inverse().unwrap()).unwrap();
        assert!(prod.distance(&ComplexMatrix::identity(5)) < 1e-12);
        let singular = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn identity_tensor_identity() {
        let i6 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(i6, ComplexMatrix::identity(6));
    }

    #[test]
    fn diagonal_tensor() {
        let (a, b, c, d) = (2.0, 3.0, 5.0, 7.0);
        let t = tensor(
            &ComplexMatrix::from_real_diagonal(&[a, b]),
            &ComplexMatrix::from_real_diagonal(&[c, d]),
        );
        assert_eq!(
            t,
            ComplexMatrix::from_real_diagonal(&[a * c, a * d, b * c, b * d])
        );
    }

    #[test]
    fn tensor_trace_factorises() {
        let a = rand_matrix(3, 3, 1);
        let b = rand_matrix(3, 3, 2);
        let direct = tensor(&a, &b).trace();
        assert!((direct - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn tensor_mixed_product() {
        let (a, b, c, d) = (
            rand_matrix(2, 3, 3),
            rand_matrix(2, 2, 4),
            rand_matrix(3, 2, 5),
            rand_matrix(2, 2, 6),
        );
        let lhs = &tensor(&a, &b) * &tensor(&c, &d);
        let rhs = tensor(&(&a * &c), &(&b * &d));
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn partial_trace_of_identity() {
        let pt = partial_trace(&ComplexMatrix::identity(4), 2, (2, 2)).unwrap();
        assert_eq!(pt, ComplexMatrix::identity(2).scale(2.0));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = rand_matrix(2, 2, 7);
        let b = rand_matrix(3, 3, 8);
        let ab = tensor(&a, &b);
        let p2 = partial_trace(&ab, 2, (2, 3)).unwrap();
        assert!(p2.distance(&a.scale_complex(b.trace())) < 1e-12);
        let p1 = partial_trace(&ab, 1, (2, 3)).unwrap();
        assert!(p1.distance(&b.scale_complex(a.trace())) < 1e-12);
    }

    #[test]
    fn partial_traces_preserve_trace() {
        let m = rand_matrix(6, 6, 9);
        let t = m.trace();
        for factor in [1, 2] {
            let r = partial_trace(&m, factor, (2, 3)).unwrap();
            assert!((r.trace() - t).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        assert!(partial_trace(&ComplexMatrix::identity(5), 2, (2, 3)).is_err());
        assert!(partial_trace(&ComplexMatrix::identity(6), 3, (2, 3)).is_err());
    }

    #[test]
    fn from_row_major_validates() {
        assert!(ComplexMatrix::from_row_major(2, 2, vec![c64(1.0, 0.0); 3]).is_err());
        assert!(matches!(
            ComplexMatrix::from_row_major(1, 1, vec![c64(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn matmul_shape_check() {
        assert!(ComplexMatrix::zeros(2, 3)
            .matmul(&ComplexMatrix::zeros(2, 3))
            .is_err());
    }
}
