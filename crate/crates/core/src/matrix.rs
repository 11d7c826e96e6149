//! Dense real matrix used throughout the crate.
//!
//! Rows are samples and columns are features. Storage is delegated to
//! `nalgebra::DMatrix`; the public surface speaks row-major semantics and
//! guarantees that every constructed value has at least one row, at least one
//! column and only finite entries.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix(DMatrix<f64>);

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "matrix must have at least one row and column, got {rows}x{cols}"
        )));
    }
    Ok(())
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        // column-major position
        let (r, c) = (pos % m.nrows(), pos / m.nrows());
        return Err(Error::invalid(format!(
            "non-finite entry {} at ({r}, {c})",
            m[(r, c)]
        )));
    }
    Ok(())
}

impl Matrix {
    /// Builds a matrix from row-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        let m = DMatrix::from_row_slice(rows, cols, &data);
        check_finite(&m)?;
        Ok(Matrix(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        check_shape(nrows, ncols)?;
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {ncols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(nrows, ncols, data)
    }

    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Matrix::new(values.len(), 1, values.to_vec())
    }

    /// Wraps an nalgebra matrix, validating shape and finiteness.
    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        check_shape(m.nrows(), m.ncols())?;
        check_finite(&m)?;
        Ok(Matrix(m))
    }

    /// Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix {rows}x{cols}");
        Matrix(DMatrix::zeros(rows, cols))
    }

    /// Panics if `n` is zero.
    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "zero-sized identity");
        Matrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        check_shape(n, n)?;
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Matrix::from_dmatrix(m)
    }

    /// Builds a matrix entry by entry. Panics on zero dimensions or a
    /// non-finite entry.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix {rows}x{cols}");
        let m = DMatrix::from_fn(rows, cols, f);
        check_finite(&m).expect("from_fn produced a non-finite entry");
        Matrix(m)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            out.extend(self.0.row(i).iter());
        }
        out
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Callers guarantee shape and finiteness.
    pub(crate) fn wrap(m: DMatrix<f64>) -> Self {
        debug_assert!(m.nrows() > 0 && m.ncols() > 0);
        Matrix(m)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let m = &self.0 * &rhs.0;
        check_finite(&m).map_err(|_| Error::Numerical("matrix product overflowed".into()))?;
        Ok(Matrix(m))
    }

    fn same_shape(&self, rhs: &Matrix, op: &str) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::invalid(format!(
                "{op}: shape mismatch {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.same_shape(rhs, "add")?;
        Matrix::from_dmatrix(&self.0 + &rhs.0)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.same_shape(rhs, "sub")?;
        Matrix::from_dmatrix(&self.0 - &rhs.0)
    }

    pub fn scale(&self, s: f64) -> Result<Matrix> {
        Matrix::from_dmatrix(&self.0 * s)
    }

    /// Entrywise map; fails if `f` produces a non-finite value.
    pub fn try_map(&self, f: impl FnMut(f64) -> f64) -> Result<Matrix> {
        Matrix::from_dmatrix(self.0.map(f))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    /// Largest absolute entrywise difference; panics on shape mismatch.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        assert_eq!(self.shape(), rhs.shape());
        self.0
            .iter()
            .zip(rhs.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Result<Matrix> {
        if idx.is_empty() {
            return Err(Error::invalid("row selection is empty"));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.rows()) {
            return Err(Error::invalid(format!("row index {bad} out of range")));
        }
        Ok(Matrix(self.0.select_rows(idx)))
    }

    pub fn select_columns(&self, idx: &[usize]) -> Result<Matrix> {
        if idx.is_empty() {
            return Err(Error::invalid("column selection is empty"));
        }
        if let Some(&bad) = idx.iter().find(|&&j| j >= self.cols()) {
            return Err(Error::invalid(format!("column index {bad} out of range")));
        }
        Ok(Matrix(self.0.select_columns(idx)))
    }

    /// Renders the matrix as headerless CSV with 17 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{:.16e}", self.0[(i, j)]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Matrix> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: format!("{s:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Matrix::from_rows(&rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Matrix> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Matrix::from_csv_str(&text)
    }
}

/// Sum of squared entry differences, `trace((G - Y)^T (G - Y))`.
pub fn sse(g: &Matrix, y: &Matrix) -> Result<f64> {
    if g.shape() != y.shape() {
        return Err(Error::invalid(format!(
            "sse: shape mismatch {:?} vs {:?}",
            g.shape(),
            y.shape()
        )));
    }
    Ok(g.0
        .iter()
        .zip(y.0.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}
