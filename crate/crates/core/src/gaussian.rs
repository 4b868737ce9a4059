//! Phase-space conventions and the small amount of structured linear
//! algebra every other module leans on.
//!
//! Ordering is `x = (q_1..q_n, p_1..p_n)`. Public APIs that talk about
//! oscillators use 1-based site labels; matrices are indexed 0-based, so
//! site `k` lives at rows `k - 1` (position) and `k - 1 + n` (momentum).

use std::f64::consts::PI;

use nalgebra::Scalar;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::{CMat, RMat, RVec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceLayout {
    n: usize,
    hbar: f64,
}

impl PhaseSpaceLayout {
    pub fn new(n: usize, hbar: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { n, min: 1 });
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::param("hbar", "must be positive and finite"));
        }
        Ok(PhaseSpaceLayout { n, hbar })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Phase-space dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n {
            return Err(Error::SiteOutOfRange { site, n: self.n });
        }
        Ok(())
    }

    /// Matrix row of `q_site` (site is 1-based).
    pub fn q_index(&self, site: usize) -> Result<usize> {
        self.check_site(site)?;
        Ok(site - 1)
    }

    /// Matrix row of `p_site` (site is 1-based).
    pub fn p_index(&self, site: usize) -> Result<usize> {
        self.check_site(site)?;
        Ok(site - 1 + self.n)
    }

    pub fn symplectic(&self) -> RMat {
        symplectic_matrix(self.n)
    }
}

/// The canonical form `J = [[0, I], [-I, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    matrix: RMat,
}

impl SymplecticForm {
    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMat {
        self.matrix
    }
}

fn symplectic_matrix(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, k + n)] = 1.0;
        j[(k + n, k)] = -1.0;
    }
    j
}

pub fn symplectic_form(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(Error::InvalidSize { n, min: 1 });
    }
    Ok(SymplecticForm {
        matrix: symplectic_matrix(n),
    })
}

/// Discrete sine transform `O_kl = sqrt(2/(n+1)) sin(k l π/(n+1))`.
///
/// Symmetric and involutory; it diagonalizes every tridiagonal symmetric
/// Toeplitz matrix of order `n`.
pub fn sine_transform(n: usize) -> Result<RMat> {
    if n == 0 {
        return Err(Error::InvalidSize { n, min: 1 });
    }
    let m = (n + 1) as f64;
    let norm = (2.0 / m).sqrt();
    Ok(RMat::from_fn(n, n, |k, l| {
        norm * (((k + 1) * (l + 1)) as f64 * PI / m).sin()
    }))
}

/// Mode frequencies `ν_m = ω + 2Ω cos(mπ/(n+1))`, ordered by mode label
/// `m = 1..n` (not by magnitude).
pub fn toeplitz_mode_frequencies(n: usize, omega: f64, coupling: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidSize { n, min: 1 });
    }
    let m = (n + 1) as f64;
    Ok((1..=n)
        .map(|k| omega + 2.0 * coupling * (k as f64 * PI / m).cos())
        .collect())
}

/// Mode frequencies together with the orthogonal matrix that produces them.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPair {
    pub frequencies: Vec<f64>,
    pub transform: RMat,
}

impl SpectralPair {
    /// Spectrum of the uniform nearest-neighbour block `ω I + Ω (shift + shiftᵀ)`.
    pub fn uniform_chain(n: usize, omega: f64, coupling: f64) -> Result<Self> {
        Ok(SpectralPair {
            frequencies: toeplitz_mode_frequencies(n, omega, coupling)?,
            transform: sine_transform(n)?,
        })
    }
}

/// Elementwise product of two equally shaped matrices.
pub fn hadamard<T>(a: &nalgebra::DMatrix<T>, b: &nalgebra::DMatrix<T>) -> Result<nalgebra::DMatrix<T>>
where
    T: Scalar + Copy + std::ops::Mul<Output = T>,
{
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(a.zip_map(b, |x, y| x * y))
}

/// First and second moments of a Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    pub mean: RVec,
    pub covariance: RMat,
}

impl GaussianState {
    pub fn new(mean: RVec, covariance: RMat) -> Result<Self> {
        let d = mean.len();
        linalg::check_shape(&covariance, (d, d))?;
        Ok(GaussianState { mean, covariance })
    }

    /// Vacuum: zero mean, `V = (ħ/2) I`.
    pub fn vacuum(layout: &PhaseSpaceLayout) -> Self {
        Self::thermal(layout, 0.0)
    }

    /// Product of identical thermal states, `V = ħ(N̄ + 1/2) I`.
    pub fn thermal(layout: &PhaseSpaceLayout, nbar: f64) -> Self {
        let d = layout.dim();
        GaussianState {
            mean: RVec::zeros(d),
            covariance: RMat::identity(d, d) * (layout.hbar() * (nbar + 0.5)),
        }
    }

    /// Smallest eigenvalue of `V + i(ħ/2)J`. Physical states have it `≥ 0`.
    pub fn physicality_margin(&self, layout: &PhaseSpaceLayout) -> Result<f64> {
        physicality_margin(&self.covariance, layout)
    }
}

/// Smallest eigenvalue of the Hermitian matrix `V + i(ħ/2)J`.
pub fn physicality_margin(v: &RMat, layout: &PhaseSpaceLayout) -> Result<f64> {
    linalg::check_shape(v, (layout.dim(), layout.dim()))?;
    let j = layout.symplectic();
    let half = 0.5 * layout.hbar();
    let m = CMat::from_fn(v.nrows(), v.ncols(), |r, c| Complex64::new(v[(r, c)], half * j[(r, c)]));
    let ev = linalg::hermitian_eigenvalues(&m)?;
    Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
}
