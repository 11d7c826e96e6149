//! Thin SVD through LAPACK's divide-and-conquer driver `dgesdd`.

use std::sync::Once;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

// links the system OpenBLAS, which also provides LAPACK
extern crate openblas_src;

extern "C" {
    fn openblas_set_num_threads(num_threads: std::os::raw::c_int);
}

static SINGLE_THREADED: Once = Once::new();

/// Multithreaded BLAS kernels may change summation order between runs.
fn pin_blas_threads() {
    SINGLE_THREADED.call_once(|| unsafe { openblas_set_num_threads(1) });
}

/// `a = u * diag(s) * v_t` with `s` in decreasing order; `u` is m x k and
/// `v_t` is k x n for `k = min(m, n)`.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

fn dim(n: usize) -> Result<i32> {
    i32::try_from(n).map_err(|_| Error::invalid(format!("dimension {n} is too large for LAPACK")))
}

fn gesdd(a: &DMatrix<f64>, vectors: bool) -> Result<Svd> {
    pin_blas_threads();
    let (m, n) = a.shape();
    let k = m.min(n);
    let (mi, ni, ki) = (dim(m)?, dim(n)?, dim(k)?);
    let jobz = if vectors { b'S' } else { b'N' };
    let (u_len, vt_len) = if vectors { (m * k, k * n) } else { (1, 1) };
    let (ldu, ldvt) = if vectors { (mi, ki) } else { (1, 1) };
    let mut s = vec![0.0; k];
    let mut u = vec![0.0; u_len];
    let mut vt = vec![0.0; vt_len];
    let mut iwork = vec![0i32; 8 * k];
    let mut info = 0;

    // column-major, as LAPACK expects
    let mut data = a.as_slice().to_vec();
    let mut query = [0.0];
    unsafe {
        lapack::dgesdd(
            jobz, mi, ni, &mut data, mi, &mut s, &mut u, ldu, &mut vt, ldvt, &mut query, -1, &mut iwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("dgesdd workspace query failed with info {info}")));
    }
    let lwork = query[0] as usize;
    let mut work = vec![0.0; lwork.max(1)];
    unsafe {
        lapack::dgesdd(
            jobz,
            mi,
            ni,
            &mut data,
            mi,
            &mut s,
            &mut u,
            ldu,
            &mut vt,
            ldvt,
            &mut work,
            dim(lwork)?,
            &mut iwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("SVD of {m}x{n} did not converge (info {info})")));
    }
    let (u, v_t) = if vectors {
        (DMatrix::from_vec(m, k, u), DMatrix::from_vec(k, n, vt))
    } else {
        (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
    };
    Ok(Svd { u, s, v_t })
}

pub(crate) fn svd(a: &DMatrix<f64>) -> Result<Svd> {
    gesdd(a, true)
}

pub(crate) fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    gesdd(a, false).map(|d| d.s)
}
