//! Heat currents, energies and occupations.
//!
//! Sign convention: a positive current is energy flowing from the
//! reservoir into the chain. All trace formulas are evaluated on the
//! second moment `M = V + x xᵀ`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, PhaseSpaceLayout};
use crate::linalg;
use crate::model::{
    ChainEnd, Coupling, GeneratorSet, HamiltonianSpec, LindbladLinear, LindbladQuadratic, ReservoirLabel, System,
};
use crate::steady::{solve_steady_state, SolverKind, SteadyMethod, SteadyState};
use crate::uniform::UniformChain;
use crate::{RMat, RVec};

/// Occupations below this are reported as unphysical.
pub const OCCUPATION_FLOOR: f64 = -1e-10;

fn jvec(v: &RVec) -> RVec {
    let n = v.len() / 2;
    RVec::from_fn(2 * n, |i, _| if i < n { v[i + n] } else { -v[i - n] })
}

fn second_moment(state: &GaussianState) -> RMat {
    &state.covariance + &state.mean * state.mean.transpose()
}

fn support(l: &LindbladLinear) -> Vec<(usize, Complex64)> {
    l.lambda
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() != 0.0)
        .map(|(i, z)| (i, *z))
        .collect()
}

/// Precomputed pieces shared by all reservoir currents of one state.
struct CurrentContext<'a> {
    h: &'a RMat,
    hbar: f64,
    m: RMat,
    /// `J M H`.
    jmh: RMat,
    x: &'a RVec,
    jxi: RVec,
    jx: RVec,
    hx: RVec,
}

impl<'a> CurrentContext<'a> {
    fn new(ham: &'a HamiltonianSpec, state: &'a GaussianState, hbar: f64) -> Self {
        let m = second_moment(state);
        let jm = RMat::from_fn(m.nrows(), m.ncols(), |i, j| {
            let n = m.nrows() / 2;
            if i < n {
                m[(i + n, j)]
            } else {
                -m[(i - n, j)]
            }
        });
        CurrentContext {
            h: &ham.h,
            hbar,
            jmh: jm * &ham.h,
            x: &state.mean,
            jxi: jvec(&ham.xi),
            jx: jvec(&state.mean),
            hx: &ham.h * &state.mean,
            m,
        }
    }

    /// `(ħ/2)Tr[H Re Υ] − Tr[H Im Υ J M] + Jξ·Im Υ Jx + η·(Jξ − Hx)`
    /// for `Υ = λλ†`, `η = Im(μ* λ)`.
    fn linear(&self, l: &LindbladLinear) -> f64 {
        let sup = support(l);
        let mut out = 0.0;
        for &(a, la) in &sup {
            for &(b, lb) in &sup {
                let u = la * lb.conj();
                out += 0.5 * self.hbar * u.re * self.h[(b, a)];
                out -= u.im * self.jmh[(b, a)];
                out += self.jxi[a] * u.im * self.jx[b];
            }
            let eta = (l.mu.conj() * la).im;
            out += eta * (self.jxi[a] - self.hx[a]);
        }
        out
    }

    /// `(ħ/2)Tr[H (JΔ)² M] + (ħ/2)Tr[H JΔ M (JΔ)ᵀ] − (ħ/2) Jξ·(JΔ)² x`.
    fn quadratic(&self, q: &LindbladQuadratic) -> f64 {
        let a = q.j_delta();
        let a2 = &a * &a;
        let nz: Vec<(usize, usize, f64)> = (0..a.ncols())
            .flat_map(|c| (0..a.nrows()).map(move |r| (r, c)))
            .filter(|&(r, c)| a[(r, c)] != 0.0)
            .map(|(r, c)| (r, c, a[(r, c)]))
            .collect();
        let half = 0.5 * self.hbar;
        let mh = &self.m * self.h;
        let mut out = 0.0;
        for c in 0..a2.ncols() {
            for r in 0..a2.nrows() {
                let v = a2[(r, c)];
                if v != 0.0 {
                    out += half * v * mh[(c, r)];
                    out -= half * self.jxi[r] * v * self.x[c];
                }
            }
        }
        for &(ra, ia, va) in &nz {
            for &(rb, jb, vb) in &nz {
                out += half * self.h[(rb, ra)] * va * self.m[(ia, jb)] * vb;
            }
        }
        out
    }
}

/// Current delivered by one linear Lindblad term.
pub fn linear_current(l: &LindbladLinear, ham: &HamiltonianSpec, state: &GaussianState, hbar: f64) -> f64 {
    CurrentContext::new(ham, state, hbar).linear(l)
}

/// Current delivered by one quadratic Lindblad term.
pub fn quadratic_current(q: &LindbladQuadratic, ham: &HamiltonianSpec, state: &GaussianState, hbar: f64) -> f64 {
    CurrentContext::new(ham, state, hbar).quadratic(q)
}

/// Currents summed per reservoir label.
pub fn reservoir_currents(
    g: &GeneratorSet,
    ham: &HamiltonianSpec,
    state: &GaussianState,
) -> BTreeMap<ReservoirLabel, f64> {
    let ctx = CurrentContext::new(ham, state, g.layout.hbar());
    let mut out = BTreeMap::new();
    for l in &g.linear {
        *out.entry(l.label).or_insert(0.0) += ctx.linear(l);
    }
    for q in &g.quadratic {
        *out.entry(q.label).or_insert(0.0) += ctx.quadratic(q);
    }
    out
}

/// `½Tr[H(D + Δ_V(M))] + Tr[H Γ̃ M] + (ξ − η)·Hx − Jξ·Γ̃x + η·Jξ`,
/// evaluated from the assembled generators rather than term by term.
pub fn total_current(g: &GeneratorSet, ham: &HamiltonianSpec, state: &GaussianState) -> f64 {
    let m = second_moment(state);
    let h = &ham.h;
    let gt = g.dressed_drift();
    let q = &g.diffusion + g.dephasing_term(&m);
    let trace_hq = h.component_mul(&q).sum();
    let trace_hgm = h.transpose().component_mul(&(&gt * &m)).sum();
    let x = &state.mean;
    let jxi = jvec(&ham.xi);
    0.5 * trace_hq + trace_hgm + (&ham.xi - &g.eta).dot(&(h * x)) - jxi.dot(&(&gt * x)) + g.eta.dot(&jxi)
}

/// `½Tr[H(V + xxᵀ)] + ξ·Jx + H₀`.
pub fn mean_energy(ham: &HamiltonianSpec, state: &GaussianState) -> f64 {
    let m = second_moment(state);
    0.5 * ham.h.component_mul(&m).sum() + ham.xi.dot(&jvec(&state.mean)) + ham.h0
}

/// `N̄^(k) = (V_kk + V_{k+n,k+n})/(2ħ) − ½`.
pub fn occupations(v: &RMat, layout: &PhaseSpaceLayout) -> Result<Vec<f64>> {
    let n = layout.n();
    linalg::check_shape(v, (2 * n, 2 * n))?;
    (0..n)
        .map(|k| {
            let occ = (v[(k, k)] + v[(k + n, k + n)]) / (2.0 * layout.hbar()) - 0.5;
            if occ < OCCUPATION_FLOOR {
                Err(Error::Unphysical {
                    site: k + 1,
                    occupation: occ,
                })
            } else {
                Ok(occ)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurrentReport {
    pub per_reservoir: BTreeMap<ReservoirLabel, f64>,
    /// From the assembled generators; equals the per-reservoir sum.
    pub total: f64,
    /// `½Tr[H D]`.
    pub diffusive_part: f64,
    /// `None` at a steady state.
    pub time: Option<f64>,
}

impl CurrentReport {
    pub fn new(sys: &System, state: &GaussianState, time: Option<f64>) -> Self {
        let g = &sys.generators;
        CurrentReport {
            per_reservoir: reservoir_currents(g, &sys.hamiltonian, state),
            total: total_current(g, &sys.hamiltonian, state),
            diffusive_part: 0.5 * sys.hamiltonian.h.component_mul(&g.diffusion).sum(),
            time,
        }
    }

    /// Current of a reservoir; zero when it is not attached.
    pub fn get(&self, label: ReservoirLabel) -> f64 {
        self.per_reservoir.get(&label).copied().unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.per_reservoir.values().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.per_reservoir.values().map(|v| v.abs()).sum()
    }

    /// Sum of the thermal currents on sites `range` (1-based, inclusive).
    pub fn thermal_sum(&self, range: std::ops::RangeInclusive<usize>) -> f64 {
        range.map(|k| self.get(ReservoirLabel::Thermal(k))).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportReport {
    pub occupations: Vec<f64>,
    pub currents: CurrentReport,
    pub mean_energy: f64,
    pub solver: Option<SolverKind>,
    pub residual: Option<f64>,
}

impl TransportReport {
    pub fn at(sys: &System, state: &GaussianState, time: Option<f64>) -> Result<Self> {
        Ok(TransportReport {
            occupations: occupations(&state.covariance, &sys.layout())?,
            currents: CurrentReport::new(sys, state, time),
            mean_energy: mean_energy(&sys.hamiltonian, state),
            solver: None,
            residual: None,
        })
    }

    pub fn steady(sys: &System, st: &SteadyState) -> Result<Self> {
        let state = GaussianState::new(st.x_star.clone(), st.v_star.clone())?;
        Ok(TransportReport {
            solver: Some(st.solver),
            residual: Some(st.relative_residual),
            ..Self::at(sys, &state, None)?
        })
    }
}

/// Solve for the steady state and evaluate all observables there.
pub fn steady_transport(sys: &System, method: SteadyMethod) -> Result<(SteadyState, TransportReport)> {
    let st = solve_steady_state(sys, method)?;
    let report = TransportReport::steady(sys, &st)?;
    Ok((st, report))
}

/// Energy and total current of a uniform chain at time `t` from the
/// explicit exponential-relaxation formulas (no covariance propagation).
pub fn transient_energy_and_current(sys: &System, initial: &GaussianState, t: f64) -> Result<(f64, f64)> {
    let u = UniformChain::from_system(sys)?;
    if sys.hamiltonian.xi.iter().any(|&v| v != 0.0) {
        return Err(Error::NotApplicable("explicit transient formulas assume ξ = 0".into()));
    }
    let h = &sys.hamiltonian.h;
    let t0 = h.component_mul(&second_moment(initial)).sum();
    let drive: f64 = u.drive.iter().sum::<f64>() / u.hbar;
    let rate = u.hbar * u.omega * (0.5 * u.zeta * u.n as f64 + drive);
    let decay = (-u.zeta * t).exp();
    let filled = if u.zeta > 0.0 {
        -(-u.zeta * t).exp_m1() / u.zeta
    } else {
        t
    };
    let energy = 0.5 * decay * t0 + rate * filled;
    let current = -0.5 * u.zeta * decay * t0 + rate * decay;
    Ok((energy, current))
}

fn bond(sys: &System, j: usize) -> Result<f64> {
    match &sys.chain.coupling {
        Coupling::Uniform(c) => Ok(*c),
        Coupling::PerBond(b) => Ok(b[j]),
        Coupling::SpringMass(_) => Err(Error::NotApplicable(
            "bond reconstruction needs rotating-wave hopping".into(),
        )),
    }
}

/// Thermal current of site `k` (1-based) rebuilt from occupations and
/// nearest-neighbour covariances: `−ħωζ_k(N̄^(k) − N̄_k) − ζ_k Σ_bonds Ω V_bond`,
/// with `V_bond` the `(qq + pp)/2` covariance across each existing bond.
pub fn thermal_current_from_covariances(v: &RMat, sys: &System, k: usize) -> Result<f64> {
    let n = sys.n();
    let layout = sys.layout();
    layout.q_index(k)?;
    let bath = sys.bank.thermal[k - 1];
    let occ = occupations(v, &layout)?[k - 1];
    let i = k - 1;
    let mut neighbour = 0.0;
    if i > 0 {
        neighbour += bond(sys, i - 1)? * 0.5 * (v[(i - 1, i)] + v[(i - 1 + n, i + n)]);
    }
    if i + 1 < n {
        neighbour += bond(sys, i)? * 0.5 * (v[(i, i + 1)] + v[(i + n, i + 1 + n)]);
    }
    Ok(-sys.chain.hbar * sys.chain.omega * bath.rate * (occ - bath.nbar) - bath.rate * neighbour)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    /// Largest gap between the trace-formula thermal current and its
    /// reconstruction from covariances.
    pub reconstruction_error: f64,
    /// Largest gap to `−ħωζ_k(N̄^(k) − N̄_k)` alone, i.e. with the
    /// nearest-neighbour covariances dropped.
    pub occupation_form_error: f64,
    /// `Σ_k J^(k)` over thermal baths.
    pub thermal_sum: f64,
    /// `J^(A) + J^(B)`.
    pub diffusive_sum: f64,
    /// `Σ_{k=2}^{n−1} J^(k)`.
    pub internal_sum: f64,
    /// `J^(1) + J^(n)` (thermal baths at the ends).
    pub end_sum: f64,
    /// Scale used for relative checks: sum of absolute currents.
    pub scale: f64,
}

impl IdentityReport {
    pub const TOLERANCE: f64 = 1e-9;

    pub fn balance_error(&self) -> f64 {
        (self.thermal_sum + self.diffusive_sum).abs()
    }

    pub fn passed(&self) -> bool {
        let tol = Self::TOLERANCE * self.scale.max(f64::MIN_POSITIVE);
        self.reconstruction_error <= tol && self.balance_error() <= tol
    }
}

/// Stationary current identities: per-site reconstruction from covariances
/// and the global balance of all reservoir currents.
pub fn steady_current_identity_check(v: &RMat, sys: &System) -> Result<IdentityReport> {
    let n = sys.n();
    let state = GaussianState::new(RVec::zeros(2 * n), v.clone())?;
    let report = CurrentReport::new(sys, &state, None);
    let occ = occupations(v, &sys.layout())?;
    let mut reconstruction_error: f64 = 0.0;
    let mut occupation_form_error: f64 = 0.0;
    for k in 1..=n {
        let bath = sys.bank.thermal[k - 1];
        let direct = report.get(ReservoirLabel::Thermal(k));
        let rebuilt = thermal_current_from_covariances(v, sys, k)?;
        reconstruction_error = reconstruction_error.max((direct - rebuilt).abs());
        let simple = -sys.chain.hbar * sys.chain.omega * bath.rate * (occ[k - 1] - bath.nbar);
        occupation_form_error = occupation_form_error.max((direct - simple).abs());
    }
    Ok(IdentityReport {
        reconstruction_error,
        occupation_form_error,
        thermal_sum: report.thermal_sum(1..=n),
        diffusive_sum: report.get(ReservoirLabel::DiffusiveA) + report.get(ReservoirLabel::DiffusiveB),
        internal_sum: report.thermal_sum(2..=n - 1),
        end_sum: report.get(ReservoirLabel::Thermal(1)) + report.get(ReservoirLabel::Thermal(n)),
        scale: report.abs_sum(),
    })
}

/// `ħω ζ_l N̄_l`, the constant current of an all-diffusive bath.
pub fn diffusive_current(sys: &System, end: ChainEnd) -> f64 {
    sys.chain.hbar * sys.chain.omega * sys.bank.diffusive_drive(end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bath, ChainSpec, ReservoirBank};
    use approx::assert_abs_diff_eq;

    fn baseline(n: usize) -> System {
        let mut bank = ReservoirBank::uniform(n, 0.1, 10.0);
        bank.diffusive_a = Some(Bath::new(0.1, 100.0));
        bank.diffusive_b = Some(Bath::new(0.1, 50.0));
        System::new(ChainSpec::uniform(n, 1.0, 0.5), bank).unwrap()
    }

    /// Dense evaluation of the single-term current straight from `Υ = λλ†`.
    fn dense_linear(l: &LindbladLinear, h: &RMat, m: &RMat, hbar: f64) -> f64 {
        let u = l.upsilon();
        let j = PhaseSpaceLayout::new(h.nrows() / 2, hbar).unwrap().symplectic();
        0.5 * hbar * (h * u.map(|z| z.re)).trace() - (h * m * j * u.map(|z| z.im)).trace()
    }

    #[test]
    fn sparse_current_matches_dense_trace() {
        let sys = baseline(4);
        let layout = sys.layout();
        let mut v = GaussianState::thermal(&layout, 1.5).covariance;
        v[(0, 1)] = 0.3;
        v[(1, 0)] = 0.3;
        v[(0, 5)] = -0.2;
        v[(5, 0)] = -0.2;
        let state = GaussianState::new(RVec::zeros(8), v.clone()).unwrap();
        for l in &sys.generators.linear {
            let a = linear_current(l, &sys.hamiltonian, &state, 1.0);
            let b = dense_linear(l, &sys.hamiltonian.h, &v, 1.0);
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn diffusive_current_value() {
        let sys = baseline(5);
        let state = GaussianState::vacuum(&sys.layout());
        let rep = CurrentReport::new(&sys, &state, Some(0.0));
        assert_abs_diff_eq!(rep.get(ReservoirLabel::DiffusiveA), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.get(ReservoirLabel::DiffusiveB), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(diffusive_current(&sys, ChainEnd::A), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_energy() {
        let sys = baseline(7);
        let e = mean_energy(&sys.hamiltonian, &GaussianState::vacuum(&sys.layout()));
        assert_abs_diff_eq!(e, 3.5, epsilon = 1e-13);
    }

    #[test]
    fn thermal_occupations() {
        let l = PhaseSpaceLayout::new(3, 2.0).unwrap();
        let occ = occupations(&GaussianState::thermal(&l, 4.0).covariance, &l).unwrap();
        for o in occ {
            assert_abs_diff_eq!(o, 4.0, epsilon = 1e-13);
        }
        let bad = RMat::identity(6, 6) * 0.1;
        assert!(matches!(occupations(&bad, &l), Err(Error::Unphysical { site: 1, .. })));
    }

    #[test]
    fn total_matches_sum_and_vanishes_at_steady_state() {
        let sys = baseline(6);
        let (st, rep) = steady_transport(&sys, SteadyMethod::Auto).unwrap();
        let c = &rep.currents;
        assert!(c.total.abs() <= 1e-10 * c.abs_sum());
        assert!((c.total - c.sum()).abs() <= 1e-10 * c.abs_sum());
        let id = steady_current_identity_check(&st.v_star, &sys).unwrap();
        assert!(id.passed(), "{id:?}");
        assert_abs_diff_eq!(id.thermal_sum, -15.0, epsilon = 1e-9);
    }

    #[test]
    fn equilibrium_has_no_currents() {
        let sys = System::new(ChainSpec::uniform(5, 1.0, 0.5), ReservoirBank::uniform(5, 0.1, 3.0)).unwrap();
        let (_, rep) = steady_transport(&sys, SteadyMethod::Auto).unwrap();
        for j in rep.currents.per_reservoir.values() {
            assert!(j.abs() < 1e-12);
        }
    }

    #[test]
    fn transient_formula_at_start() {
        let sys = baseline(5);
        let init = GaussianState::vacuum(&sys.layout());
        let (e, j) = transient_energy_and_current(&sys, &init, 0.0).unwrap();
        assert_abs_diff_eq!(e, 2.5, epsilon = 1e-13);
        let direct = total_current(&sys.generators, &sys.hamiltonian, &init);
        assert_abs_diff_eq!(j, direct, epsilon = 1e-12);
        // ħω(ζn/2 + ζΣN̄ + ζ_A N̄_A + ζ_B N̄_B) − (ζ/2)Tr(H V₀)
        assert_abs_diff_eq!(j, 0.25 + 5.0 + 15.0 - 0.05 * 5.0, epsilon = 1e-12);
    }
}
