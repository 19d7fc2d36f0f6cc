//! Complex dense and sparse matrices plus the factorization kernels used by
//! the quadrature pipeline.
//!
//! Dense storage is column-major: entry `(i, j)` lives at `data[i + j * n_rows]`.
//! All arithmetic is complex; real inputs are promoted on load.

mod eig;
mod lu;
mod mtx;
mod qr;

pub use eig::{eig_dense, EigDecomposition};
pub use lu::{lu_factor, lu_solve, LuFactors, TOL_PIVOT};
pub use mtx::{read_matrix_market, write_matrix_market, MmField, MmFormat};
pub use qr::{default_rank_tol, qr_column_pivoted, qr_column_pivoted_with_floor, qr_thin, RrqrFactors};

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![ZERO; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for j in 0..n_cols {
            for i in 0..n_rows {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n_rows, n_cols, data }
    }

    /// Builds a matrix from column-major data, rejecting NaN and infinities.
    pub fn from_col_major(n_rows: usize, n_cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n_rows}x{n_cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k % n_rows.max(1),
                col: k / n_rows.max(1),
            });
        }
        Ok(DenseMatrix { n_rows, n_cols, data })
    }

    /// Row-major nested slices, mainly for tests and small literals.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let m = Self::from_fn(n_rows, n_cols, |i, j| rows[i][j]);
        Self::from_col_major(n_rows, n_cols, m.data)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    /// Copy of columns `range`.
    pub fn columns(&self, range: std::ops::Range<usize>) -> DenseMatrix {
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: range.len(),
            data: self.data[range.start * self.n_rows..range.end * self.n_rows].to_vec(),
        }
    }

    pub fn column_vector(&self, j: usize) -> DenseMatrix {
        self.columns(j..j + 1)
    }

    /// `[self, other]`
    pub fn hcat(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_rows != other.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "hcat of {} rows with {} rows",
                self.n_rows, other.n_rows
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols + other.n_cols,
            data,
        })
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n_cols, self.n_rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n_cols, self.n_rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> DenseMatrix {
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, alpha: Complex64) -> DenseMatrix {
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|&z| z * alpha).collect(),
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: Complex64, other: &DenseMatrix) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        out.axpy(-ONE, other);
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        out.axpy(ONE, other);
        out
    }

    /// `self * rhs`
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, rhs.n_rows, "matmul inner dimension mismatch");
        let mut out = DenseMatrix::zeros(self.n_rows, rhs.n_cols);
        for j in 0..rhs.n_cols {
            let out_col = &mut out.data[j * self.n_rows..(j + 1) * self.n_rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b == ZERO {
                    continue;
                }
                for (o, &a) in out_col.iter_mut().zip(self.col(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^* * rhs` without forming the adjoint.
    pub fn adjoint_matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_rows, rhs.n_rows, "adjoint_matmul dimension mismatch");
        DenseMatrix::from_fn(self.n_cols, rhs.n_cols, |i, j| dotc(self.col(i), rhs.col(j)))
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.n_cols)
            .map(|j| self.col(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        &self.data[i + j * self.n_rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        &mut self.data[i + j * self.n_rows]
    }
}

/// `x^* y`
#[inline]
pub(crate) fn dotc(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

#[inline]
pub(crate) fn norm2(x: &[Complex64]) -> f64 {
    // scaled to avoid overflow on large-magnitude pencils (BFW-scale entries ~1e6)
    let scale = x.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|z| (z / scale).norm_sqr()).sum::<f64>().sqrt()
}

/// Storage tag from a Matrix Market header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// Coordinate-form complex matrix. After assembly there are no duplicate
/// `(row, col)` pairs and symmetric storage has been expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, Complex64)>,
    symmetry: Symmetry,
}

impl SparseMatrix {
    /// Assembles from explicit 0-based triplets. Duplicates are summed; the
    /// symmetry tag is informational (entries must already be expanded).
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
        symmetry: Symmetry,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({i}, {j}) outside {n_rows}x{n_cols}"
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            entries.push((i, j, v));
        }
        entries.sort_by_key(|&(i, j, _)| (j, i));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            entries: merged,
            symmetry,
        })
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            entries: (0..n).map(|i| (i, i, ONE)).collect(),
            symmetry: Symmetry::Symmetric,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.n_cols() {
            for i in 0..m.n_rows() {
                let v = m[(i, j)];
                if v != ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        SparseMatrix {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            entries,
            symmetry: Symmetry::General,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Entries sorted column-major, 0-based.
    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.2.im == 0.0)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }

    pub fn scale(&self, alpha: Complex64) -> SparseMatrix {
        SparseMatrix {
            entries: self.entries.iter().map(|&(i, j, v)| (i, j, v * alpha)).collect(),
            ..self.clone()
        }
    }

    /// `self * x`
    pub fn matmul_dense(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, x.n_rows(), "sparse matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.n_rows, x.n_cols());
        for c in 0..x.n_cols() {
            let xc = x.col(c);
            let oc = out.col_mut(c);
            for &(i, j, v) in &self.entries {
                oc[i] += v * xc[j];
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n_cols, x.len(), "sparse matvec dimension mismatch");
        let mut out = vec![ZERO; self.n_rows];
        for &(i, j, v) in &self.entries {
            out[i] += v * x[j];
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt()
    }
}
