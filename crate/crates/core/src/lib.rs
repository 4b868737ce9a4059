//! Heat transport in open quantum harmonic chains, in the Gaussian
//! (covariance-matrix) formalism.
//!
//! A chain of `n` oscillators is described by the phase-space vector
//! `x = (q_1..q_n, p_1..p_n)`. Reservoirs enter through linear Lindblad
//! operators (thermal and all-diffusive baths) and quadratic ones (local
//! dephasing). The crate assembles the drift `Γ` and diffusion `D` of the
//! moment equations, solves for transient and stationary covariance
//! matrices, and evaluates heat currents, energies and occupations.
//!
//! Module map:
//!
//! - [`gaussian`]: phase-space layout, symplectic form, sine transform,
//!   Gaussian states, Hadamard products.
//! - [`expm`]: dense matrix exponential.
//! - [`model`]: chain/reservoir specifications and generator assembly.
//! - [`uniform`]: closed-form machinery for uniform rotating-wave chains.
//! - [`steady`]: stability and stationary covariance solvers.
//! - [`propagator`]: closed-form and RK4 time evolution.
//! - [`thermo`]: currents, energies, occupations and current identities.
//! - [`scenarios`]: scenario presets, closed-form cross-checks and sweeps.

pub mod error;
pub mod expm;
pub mod gaussian;
pub(crate) mod linalg;
pub mod model;
pub mod propagator;
pub mod scenarios;
pub mod steady;
pub mod thermo;
pub mod uniform;

pub use error::{Error, Result};
pub use gaussian::{GaussianState, PhaseSpaceLayout, SpectralPair, SymplecticForm};
pub use model::{
    Bath, ChainEnd, ChainSpec, Coupling, GeneratorSet, HamiltonianSpec, LindbladLinear, LindbladQuadratic,
    ReservoirBank, ReservoirLabel, System,
};
pub use steady::{SolverKind, SteadyMethod, SteadyState};
pub use thermo::{CurrentReport, TransportReport};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense real matrix.
pub type RMat = DMatrix<f64>;
/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;
/// Dense real vector.
pub type RVec = DVector<f64>;
/// Dense complex vector.
pub type CVec = DVector<Complex64>;
