//! Moore-Penrose pseudoinverse via truncated SVD, with Penrose-condition
//! verification and minimum-norm least-squares solving.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::svd::{self, Svd};

/// Which singular values count as zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// `sigma <= max(rows, cols) * eps * sigma_max`.
    #[default]
    Automatic,
    /// `sigma <= tau`.
    Explicit(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct PinvOptions {
    #[serde(default)]
    pub tolerance: Tolerance,
    /// Ridge parameter; zero reproduces the exact pseudoinverse.
    #[serde(default)]
    pub ridge: f64,
}

impl PinvOptions {
    pub fn exact() -> Self {
        PinvOptions {
            tolerance: Tolerance::Explicit(0.0),
            ridge: 0.0,
        }
    }

    pub fn with_ridge(ridge: f64) -> Self {
        PinvOptions {
            ridge,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Tolerance::Explicit(tau) = self.tolerance {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(Error::invalid(format!("tolerance must be >= 0, got {tau}")));
            }
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::invalid(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        Ok(())
    }
}

fn cutoff(opts: &PinvOptions, shape: (usize, usize), sigma_max: f64) -> f64 {
    match opts.tolerance {
        Tolerance::Automatic => shape.0.max(shape.1) as f64 * f64::EPSILON * sigma_max,
        Tolerance::Explicit(tau) => tau,
    }
}

/// Inverted spectrum: `1/sigma` above the cutoff (or `sigma/(sigma^2+lambda)`
/// under ridge), zero otherwise. Returns the count of retained values.
fn invert_spectrum(sv: &[f64], opts: &PinvOptions, shape: (usize, usize)) -> (Vec<f64>, usize) {
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    let cut = cutoff(opts, shape, sigma_max);
    let mut kept = 0;
    let inv = sv.iter().map(|&s| {
        if opts.ridge > 0.0 {
            if s > 0.0 {
                kept += 1;
            }
            s / (s * s + opts.ridge)
        } else if s > cut {
            kept += 1;
            1.0 / s
        } else {
            0.0
        }
    });
    let inv = inv.collect();
    (inv, kept)
}

fn assemble(svd: &Svd, inv: &[f64]) -> DMatrix<f64> {
    // V * diag(inv) * U^T
    let mut v_scaled = svd.v_t.transpose();
    for (j, mut col) in v_scaled.column_iter_mut().enumerate() {
        col *= inv[j];
    }
    v_scaled * svd.u.transpose()
}

/// Pseudoinverse of `a` and the number of singular values kept.
pub fn pinv_with_rank(a: &Matrix, opts: &PinvOptions) -> Result<(Matrix, usize)> {
    opts.validate()?;
    let svd = svd::svd(a.as_dmatrix())?;
    let (inv, rank) = invert_spectrum(&svd.s, opts, a.shape());
    let p = assemble(&svd, &inv);
    Ok((Matrix::from_dmatrix(p)?, rank))
}

pub fn pinv(a: &Matrix, opts: &PinvOptions) -> Result<Matrix> {
    pinv_with_rank(a, opts).map(|(p, _)| p)
}

/// Numerical rank under the automatic tolerance.
pub fn rank(a: &Matrix) -> Result<usize> {
    let sv = singular_values(a)?;
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    let cut = cutoff(&PinvOptions::default(), a.shape(), sigma_max);
    Ok(sv.iter().filter(|&&s| s > cut).count())
}

/// Singular values in decreasing order.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    svd::singular_values(a.as_dmatrix())
}

/// Deliberately corrupted pseudoinverse: the reciprocal of the largest
/// retained singular value has its sign flipped. Negative control for the
/// self-check.
#[doc(hidden)]
pub fn pinv_with_flipped_singular_value(a: &Matrix, opts: &PinvOptions) -> Result<Matrix> {
    opts.validate()?;
    let svd = svd::svd(a.as_dmatrix())?;
    let (mut inv, _) = invert_spectrum(&svd.s, opts, a.shape());
    if let Some(i) = (0..inv.len()).find(|&i| inv[i] != 0.0) {
        inv[i] = -inv[i];
    }
    Matrix::from_dmatrix(assemble(&svd, &inv))
}

/// Largest violation of the four Penrose conditions, each measured as a
/// Frobenius norm and scaled by `max(1, ||a||_F)`.
pub fn penrose_residual(a: &Matrix, a_dag: &Matrix) -> Result<f64> {
    if a_dag.rows() != a.cols() || a_dag.cols() != a.rows() {
        return Err(Error::invalid(format!(
            "penrose_residual: a is {}x{} but candidate inverse is {}x{}",
            a.rows(),
            a.cols(),
            a_dag.rows(),
            a_dag.cols()
        )));
    }
    let a = a.as_dmatrix();
    let p = a_dag.as_dmatrix();
    let ap = a * p;
    let pa = p * a;
    let c1 = (&ap * a - a).norm();
    let c2 = (&pa * p - p).norm();
    let c3 = (ap.transpose() - &ap).norm();
    let c4 = (pa.transpose() - &pa).norm();
    let worst = c1.max(c2).max(c3).max(c4);
    Ok(worst / a.norm().max(1.0))
}

/// Minimum-norm least-squares solution `A^+ Y`.
pub fn solve_least_squares(a: &Matrix, y: &Matrix, opts: &PinvOptions) -> Result<Matrix> {
    if a.rows() != y.rows() {
        return Err(Error::invalid(format!(
            "solve_least_squares: a has {} rows but y has {}",
            a.rows(),
            y.rows()
        )));
    }
    pinv(a, opts)?.matmul(y)
}
