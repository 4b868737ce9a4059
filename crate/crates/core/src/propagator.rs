//! Transient moment dynamics: closed forms for uniform chains and a
//! fixed-step RK4 integrator for everything else.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expm::matrix_exp;
use crate::gaussian::GaussianState;
use crate::linalg;
use crate::model::{GeneratorSet, System};
use crate::uniform::{decay_integral, UniformChain};
use crate::{CMat, RMat, RVec};

use num_complex::Complex64;

/// Frequencies closer than this (relative to `ω`) count as degenerate in
/// the `ζ = 0` kernel.
pub const DEGENERATE_FREQUENCY: f64 = 1e-9;

/// `L_jk(t) = (1 − e^{−[ζ + i(ν_j − ν_k)]t})/(ζ + i(ν_j − ν_k))`.
///
/// At `ζ = 0` and degenerate frequencies the entry is exactly `t`.
pub fn l_matrix(frequencies: &[f64], zeta: f64, t: f64, omega: f64) -> CMat {
    let n = frequencies.len();
    CMat::from_fn(n, n, |j, k| {
        let dnu = frequencies[j] - frequencies[k];
        if zeta == 0.0 && dnu.abs() < DEGENERATE_FREQUENCY * omega.abs() {
            Complex64::new(t, 0.0)
        } else {
            decay_integral(Complex64::new(zeta, dnu), t)
        }
    })
}

/// `x(t) = e^{Γt}x₀ + Γ⁻¹(e^{Γt} − I)(ξ − η)`.
pub fn evolve_mean_exact(x0: &RVec, gamma: &RMat, xi: &RVec, eta: &RVec, t: f64) -> Result<RVec> {
    let dim = linalg::check_square(gamma)?;
    if x0.len() != dim || xi.len() != dim || eta.len() != dim {
        return Err(Error::ShapeMismatch {
            expected: (dim, 1),
            found: (x0.len(), 1),
        });
    }
    let e = matrix_exp(gamma, t)?;
    let mut x = &e * x0;
    let drive = xi - eta;
    if drive.iter().any(|&v| v != 0.0) {
        let rhs = (&e - RMat::identity(dim, dim)) * drive;
        let rhs = RMat::from_iterator(dim, 1, rhs.iter().copied());
        let y = linalg::solve_dense(gamma, &rhs, "affine mean propagation")?;
        x += RVec::from_iterator(dim, y.iter().copied());
    }
    Ok(x)
}

fn evolve_uniform(v0: &RMat, u: &UniformChain, t: f64) -> Result<RMat> {
    linalg::check_shape(v0, (2 * u.n, 2 * u.n))?;
    let e = u.exp_drift(t);
    let kernel = l_matrix(u.frequencies(), u.zeta, t, u.omega);
    let vac = 0.5 * u.hbar * (1.0 - (-u.zeta * t).exp());
    let mut v = &e * v0 * e.transpose() + u.hadamard_blocks(&kernel);
    for i in 0..2 * u.n {
        v[(i, i)] += vac;
    }
    linalg::symmetrize(&mut v);
    Ok(v)
}

/// Closed-form `V(t)` for a uniform chain with a common rate `ζ > 0`.
pub fn evolve_cm_closed(v0: &RMat, sys: &System, t: f64) -> Result<RMat> {
    let u = UniformChain::from_system(sys)?;
    if u.zeta.is_nan() || u.zeta <= 0.0 {
        return Err(Error::NotApplicable(
            "zero thermal rate: use the all-diffusive propagator".into(),
        ));
    }
    evolve_uniform(v0, &u, t)
}

/// Closed-form `V(t)` for a uniform chain driven only by the end-chain
/// diffusive baths.
pub fn evolve_all_diffusive(v0: &RMat, sys: &System, t: f64) -> Result<RMat> {
    if sys.bank.has_thermal() {
        return Err(Error::NotApplicable(
            "thermal baths present: use the damped closed form".into(),
        ));
    }
    let u = UniformChain::from_system(sys)?;
    evolve_uniform(v0, &u, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Rk4 { dt: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GaussianState>,
    pub provenance: Provenance,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::param("times", "must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "must be non-decreasing"));
    }
    Ok(())
}

struct Rhs<'a> {
    g: &'a GeneratorSet,
    gt: RMat,
    drive: RVec,
}

impl Rhs<'_> {
    fn eval(&self, v: &RMat, x: &RVec) -> (RMat, RVec) {
        let gv = &self.gt * v;
        let mut dv = &gv + gv.transpose() + &self.g.diffusion;
        if self.g.has_dephasing() {
            let m = v + x * x.transpose();
            dv += self.g.dephasing_term(&m);
        }
        let dx = &self.drive + &self.gt * x;
        (dv, dx)
    }
}

/// Classical RK4 on `dV/dt = Γ̃V + VΓ̃ᵀ + D + Δ_V(V + xxᵀ)`,
/// `dx/dt = ξ − η + Γ̃x`, sampled at `times` (steps are shortened so that
/// every sample time is hit exactly). `V` is symmetrized after each step.
pub fn evolve_ode(initial: &GaussianState, g: &GeneratorSet, xi: &RVec, times: &[f64], dt: f64) -> Result<Trajectory> {
    let dim = g.layout.dim();
    linalg::check_shape(&initial.covariance, (dim, dim))?;
    if initial.mean.len() != dim || xi.len() != dim {
        return Err(Error::ShapeMismatch {
            expected: (dim, 1),
            found: (initial.mean.len(), 1),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", "must be positive and finite"));
    }
    check_times(times)?;
    let rhs = Rhs {
        g,
        gt: g.dressed_drift(),
        drive: xi - &g.eta,
    };
    let mut v = initial.covariance.clone();
    let mut x = initial.mean.clone();
    let mut now = 0.0;
    let mut step = 0usize;
    let mut states = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - now;
        let count = (span / dt).ceil() as usize;
        if count > 0 {
            let h = span / count as f64;
            for _ in 0..count {
                let (k1v, k1x) = rhs.eval(&v, &x);
                let (k2v, k2x) = rhs.eval(&(&v + &k1v * (0.5 * h)), &(&x + &k1x * (0.5 * h)));
                let (k3v, k3x) = rhs.eval(&(&v + &k2v * (0.5 * h)), &(&x + &k2x * (0.5 * h)));
                let (k4v, k4x) = rhs.eval(&(&v + &k3v * h), &(&x + &k3x * h));
                v += (k1v + (k2v + k3v) * 2.0 + k4v) * (h / 6.0);
                x += (k1x + (k2x + k3x) * 2.0 + k4x) * (h / 6.0);
                linalg::symmetrize(&mut v);
                step += 1;
                now += h;
                if !v.iter().chain(x.iter()).all(|c| c.is_finite()) {
                    return Err(Error::Diverged { step, time: now });
                }
            }
        }
        now = target;
        states.push(GaussianState {
            mean: x.clone(),
            covariance: v.clone(),
        });
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        provenance: Provenance::Rk4 { dt },
    })
}

/// Closed forms when the chain is uniform without dephasing, RK4 otherwise.
pub fn evolve_system(sys: &System, initial: &GaussianState, times: &[f64], dt: f64) -> Result<Trajectory> {
    check_times(times)?;
    let Ok(u) = UniformChain::from_system(sys) else {
        return evolve_ode(initial, &sys.generators, &sys.hamiltonian.xi, times, dt);
    };
    let g = &sys.generators;
    let states = times
        .iter()
        .map(|&t| {
            Ok(GaussianState {
                mean: evolve_mean_exact(&initial.mean, &g.gamma, &sys.hamiltonian.xi, &g.eta, t)?,
                covariance: evolve_uniform(&initial.covariance, &u, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        provenance: Provenance::ClosedForm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bath, ChainSpec, ReservoirBank};
    use crate::steady::{solve_steady_state, SteadyMethod};

    fn baseline(n: usize) -> System {
        let mut bank = ReservoirBank::uniform(n, 0.1, 10.0);
        bank.diffusive_a = Some(Bath::new(0.1, 100.0));
        bank.diffusive_b = Some(Bath::new(0.1, 50.0));
        System::new(ChainSpec::uniform(n, 1.0, 0.5), bank).unwrap()
    }

    #[test]
    fn closed_form_at_zero_time() {
        let sys = baseline(5);
        let v0 = GaussianState::thermal(&sys.layout(), 2.0).covariance;
        let v = evolve_cm_closed(&v0, &sys, 0.0).unwrap();
        assert!((v - &v0).amax() < 1e-14);
    }

    #[test]
    fn closed_form_matches_rk4() {
        let sys = baseline(5);
        let init = GaussianState::vacuum(&sys.layout());
        let closed = evolve_cm_closed(&init.covariance, &sys, 5.0).unwrap();
        let traj = evolve_ode(&init, &sys.generators, &sys.hamiltonian.xi, &[5.0], 0.01).unwrap();
        assert!((closed - &traj.states[0].covariance).amax() < 1e-7);
    }

    #[test]
    fn long_time_limit_is_steady_state() {
        let sys = baseline(6);
        let init = GaussianState::vacuum(&sys.layout());
        let v = evolve_cm_closed(&init.covariance, &sys, 600.0).unwrap();
        let st = solve_steady_state(&sys, SteadyMethod::ClosedForm).unwrap();
        assert!((v - st.v_star).amax() < 1e-10);
    }

    #[test]
    fn scalar_decay() {
        let layout = crate::gaussian::PhaseSpaceLayout::new(2, 1.0).unwrap();
        let g = GeneratorSet {
            layout,
            gamma: RMat::identity(4, 4) * -0.05,
            diffusion: RMat::zeros(4, 4),
            upsilon: CMat::zeros(4, 4),
            eta: RVec::zeros(4),
            linear: vec![],
            quadratic: vec![],
        };
        let init = GaussianState::thermal(&layout, 1.0);
        let traj = evolve_ode(&init, &g, &RVec::zeros(4), &[3.0], 0.01).unwrap();
        let expected = &init.covariance * (-0.1 * 3.0f64).exp();
        assert!((&traj.states[0].covariance - expected).amax() < 1e-9);
    }

    #[test]
    fn zero_rate_kernel_diagonal_is_time() {
        let nu = crate::gaussian::toeplitz_mode_frequencies(9, 1.0, 0.5).unwrap();
        let l = l_matrix(&nu, 0.0, 7.25, 1.0);
        for j in 0..9 {
            assert_eq!(l[(j, j)], Complex64::new(7.25, 0.0));
            for k in 0..9 {
                assert!((l[(j, k)] - l[(k, j)].conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn mean_propagation() {
        let sys = baseline(2);
        let g = &sys.generators;
        let x0 = RVec::from_vec(vec![1.0, 0.0, -0.5, 2.0]);
        let zero = RVec::zeros(4);
        assert_eq!(evolve_mean_exact(&x0, &g.gamma, &zero, &zero, 0.0).unwrap(), x0);
        assert_eq!(evolve_mean_exact(&zero, &g.gamma, &zero, &zero, 3.0).unwrap(), zero);
        let xi = RVec::from_vec(vec![0.3, -0.1, 0.2, 0.0]);
        let exact = evolve_mean_exact(&x0, &g.gamma, &xi, &zero, 2.0).unwrap();
        let init = GaussianState::new(x0, RMat::identity(4, 4)).unwrap();
        let traj = evolve_ode(&init, g, &xi, &[2.0], 0.005).unwrap();
        assert!((exact - &traj.states[0].mean).amax() < 1e-8);
    }

    #[test]
    fn rejects_bad_grid() {
        let sys = baseline(2);
        let init = GaussianState::vacuum(&sys.layout());
        assert!(evolve_ode(&init, &sys.generators, &sys.hamiltonian.xi, &[2.0, 1.0], 0.1).is_err());
        assert!(evolve_ode(&init, &sys.generators, &sys.hamiltonian.xi, &[1.0], 0.0).is_err());
    }
}
