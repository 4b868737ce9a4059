//! Thin bridge to `faer` for the decompositions `nalgebra` lacks
//! (general complex eigenvectors, Hermitian spectra).

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMat, RMat};

pub(crate) struct Eigensystem {
    pub values: Vec<Complex64>,
    /// Right eigenvectors, one per column.
    pub vectors: CMat,
}

fn to_faer(a: &RMat) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn to_faer_c(a: &CMat) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub(crate) fn check_square(a: &RMat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::ShapeMismatch {
            expected: (a.nrows(), a.nrows()),
            found: a.shape(),
        });
    }
    Ok(a.nrows())
}

pub(crate) fn check_shape(a: &RMat, expected: (usize, usize)) -> Result<()> {
    if a.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            found: a.shape(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(a: &RMat, what: &'static str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn eigen(a: &RMat) -> Result<Eigensystem> {
    let n = check_square(a)?;
    let evd = to_faer(a).eigen().map_err(|_| Error::EigenFailure)?;
    let s = evd.S();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| u[(i, j)]);
    Ok(Eigensystem { values, vectors })
}

pub(crate) fn eigenvalues(a: &RMat) -> Result<Vec<Complex64>> {
    check_square(a)?;
    to_faer(a).eigenvalues().map_err(|_| Error::EigenFailure)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    to_faer_c(a)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::EigenFailure)
}

/// Eigenvalues of a real symmetric matrix, ascending.
#[cfg(test)]
pub(crate) fn symmetric_eigenvalues(a: &RMat) -> Result<Vec<f64>> {
    to_faer(a)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::EigenFailure)
}

pub(crate) fn complex_inverse(a: &CMat) -> Result<CMat> {
    a.clone().try_inverse().ok_or(Error::Singular("complex matrix inverse"))
}

pub(crate) fn symmetrize(a: &mut RMat) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

/// `a ⊕ b` as a block-diagonal matrix.
pub(crate) fn direct_sum(a: &RMat, b: &RMat) -> RMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = RMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Dense `A X = B` by partially pivoted LU. Zero pivots surface as
/// non-finite output, which is reported as singular.
pub(crate) fn solve_dense(a: &RMat, b: &RMat, what: &'static str) -> Result<RMat> {
    use faer::linalg::solvers::Solve;
    let n = check_square(a)?;
    check_shape(b, (n, b.ncols()))?;
    let lu = to_faer(a).partial_piv_lu();
    let x = lu.solve(to_faer(b));
    let out = RMat::from_fn(n, b.ncols(), |i, j| x[(i, j)]);
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Singular(what))
    }
}
