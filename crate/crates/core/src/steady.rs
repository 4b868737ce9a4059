//! Stability of the drift and stationary covariance matrices.
//!
//! Four independent routes to `V⋆`:
//!
//! - spectral: diagonalize `Γ` and divide by eigenvalue sums;
//! - vectorized: the full `(2n)² × (2n)²` linear system, dephasing included;
//! - capacitance: spectral solve plus a small dense correction for the
//!   local blocks touched by dephasing;
//! - closed form: Hadamard products in the sine-transform basis (uniform
//!   chains only).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::PhaseSpaceLayout;
use crate::linalg;
use crate::model::{GeneratorSet, LindbladQuadratic, System};
use crate::uniform::UniformChain;
use crate::{CMat, RMat, RVec};

/// Relative Lyapunov residual every accepted solution must meet.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Largest chain the vectorized solver is used for automatically.
pub const VECTORIZED_AUTO_MAX_N: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    pub stable: bool,
    /// `−max Re λ`.
    pub spectral_gap: f64,
}

/// Stable means every eigenvalue has a strictly negative real part, with a
/// margin of `1e-10 ‖Γ‖` so that a purely Hamiltonian flow is never
/// classified stable through round-off.
pub fn stability_check(gamma: &RMat) -> Result<StabilityReport> {
    linalg::check_square(gamma)?;
    linalg::check_finite(gamma, "drift matrix")?;
    let eigenvalues = linalg::eigenvalues(gamma)?;
    let max_real = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let margin = 1e-10 * gamma.norm().max(f64::MIN_POSITIVE);
    Ok(StabilityReport {
        stable: max_real < -margin,
        spectral_gap: -max_real,
        eigenvalues,
    })
}

fn require_stable(gamma: &RMat) -> Result<()> {
    let report = stability_check(gamma)?;
    if report.stable {
        Ok(())
    } else {
        Err(Error::Unstable {
            max_real: -report.spectral_gap,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Spectral,
    Vectorized,
    Capacitance,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    /// Spectral without dephasing, capacitance with it; vectorized fallback
    /// for small chains when the spectral route is ill-conditioned.
    #[default]
    Auto,
    Spectral,
    Vectorized,
    Capacitance,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    pub v_star: RMat,
    pub x_star: RVec,
    /// Frobenius norm of the full stationary equation at `(V⋆, x⋆)`.
    pub residual: f64,
    /// `residual / ‖D_eff‖_F`.
    pub relative_residual: f64,
    pub solver: SolverKind,
}

/// `‖ΓV + VΓᵀ + Q‖_F`.
pub fn lyapunov_residual(gamma: &RMat, v: &RMat, q: &RMat) -> f64 {
    let gv = gamma * v;
    (&gv + gv.transpose() + q).norm()
}

fn relative(residual: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        residual / scale
    } else {
        residual
    }
}

/// Eigendecomposition of a stable drift, reusable across right-hand sides.
pub struct SpectralLyapunov {
    values: Vec<Complex64>,
    s: CMat,
    s_inv: CMat,
    /// `K_jk = −1/(λ_j + λ_k)`.
    kernel: CMat,
}

impl SpectralLyapunov {
    pub fn new(gamma: &RMat) -> Result<Self> {
        let es = linalg::eigen(gamma)?;
        let norm = gamma.norm();
        let values = es.values;
        let dim = values.len();
        let mut min_sum = f64::INFINITY;
        let kernel = CMat::from_fn(dim, dim, |j, k| {
            let s = values[j] + values[k];
            min_sum = min_sum.min(s.norm());
            -s.inv()
        });
        if min_sum < 1e-12 * norm {
            return Err(Error::NearDefective { min_sum });
        }
        let s_inv = linalg::complex_inverse(&es.vectors)?;
        Ok(SpectralLyapunov {
            values,
            s: es.vectors,
            s_inv,
            kernel,
        })
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.values
    }

    /// `V` with `ΓV + VΓᵀ + Q = 0`.
    pub fn solve(&self, q: &RMat) -> RMat {
        let qc = q.map(Complex64::from);
        let dt = &self.s_inv * qc * self.s_inv.transpose();
        let w = dt.component_mul(&self.kernel);
        let mut v = (&self.s * w * self.s.transpose()).map(|z| z.re);
        linalg::symmetrize(&mut v);
        v
    }
}

/// Spectral Lyapunov solve `ΓV + VΓᵀ + D = 0`.
pub fn solve_lyapunov_spectral(gamma: &RMat, d: &RMat) -> Result<SteadyState> {
    let dim = linalg::check_square(gamma)?;
    linalg::check_shape(d, (dim, dim))?;
    linalg::check_finite(d, "diffusion matrix")?;
    require_stable(gamma)?;
    let v = SpectralLyapunov::new(gamma)?.solve(d);
    let residual = lyapunov_residual(gamma, &v, d);
    let relative_residual = relative(residual, d.norm());
    if relative_residual > RESIDUAL_TOLERANCE {
        return Err(Error::IllConditioned { relative_residual });
    }
    Ok(SteadyState {
        v_star: v,
        x_star: RVec::zeros(dim),
        residual,
        relative_residual,
        solver: SolverKind::Spectral,
    })
}

/// `Γ̃ = Γ + (ħ/2) Σ (JΔ)²`.
pub fn dressed_drift(gamma: &RMat, deltas: &[LindbladQuadratic], hbar: f64) -> RMat {
    let mut g = gamma.clone();
    for q in deltas {
        let jd = q.j_delta();
        g += (&jd * &jd) * (0.5 * hbar);
    }
    g
}

fn dephasing_map(v: &RMat, deltas: &[LindbladQuadratic], hbar: f64) -> RMat {
    let mut out = RMat::zeros(v.nrows(), v.ncols());
    for q in deltas {
        let jd = q.j_delta();
        out += &jd * v * jd.transpose() * hbar;
    }
    out
}

fn extended_residual(gt: &RMat, v: &RMat, d: &RMat, deltas: &[LindbladQuadratic], hbar: f64) -> f64 {
    let q = d + dephasing_map(v, deltas, hbar);
    lyapunov_residual(gt, v, &q)
}

/// Steady state of `Γ̃V + VΓ̃ᵀ + ħΣ JΔ V (JΔ)ᵀ + D = 0` by flattening to a
/// dense linear system (column-major `vec`). `gamma` is the drift without
/// the dephasing dressing.
pub fn solve_lyapunov_vectorized(
    gamma: &RMat,
    d: &RMat,
    deltas: &[LindbladQuadratic],
    hbar: f64,
) -> Result<SteadyState> {
    let dim = linalg::check_square(gamma)?;
    linalg::check_shape(d, (dim, dim))?;
    linalg::check_finite(d, "diffusion matrix")?;
    for q in deltas {
        linalg::check_shape(&q.delta, (dim, dim))?;
    }
    require_stable(gamma)?;
    let gt = dressed_drift(gamma, deltas, hbar);
    require_stable(&gt)?;

    let big = dim * dim;
    let mut a = RMat::zeros(big, big);
    for j in 0..dim {
        for i in 0..dim {
            let row = i + dim * j;
            for k in 0..dim {
                a[(row, k + dim * j)] += gt[(i, k)];
                a[(row, i + dim * k)] += gt[(j, k)];
            }
        }
    }
    for q in deltas {
        let jd = q.j_delta();
        let nz: Vec<_> = (0..dim)
            .flat_map(|c| (0..dim).map(move |r| (r, c)))
            .filter(|&(r, c)| jd[(r, c)] != 0.0)
            .map(|(r, c)| (r, c, jd[(r, c)]))
            .collect();
        for &(i, k, aik) in &nz {
            for &(j, l, ajl) in &nz {
                a[(i + dim * j, k + dim * l)] += hbar * aik * ajl;
            }
        }
    }
    let rhs = RMat::from_iterator(big, 1, d.iter().map(|x| -x));
    let x = linalg::solve_dense(&a, &rhs, "vectorized Lyapunov system")?;
    let mut v = RMat::from_iterator(dim, dim, x.iter().copied());
    linalg::symmetrize(&mut v);

    let residual = extended_residual(&gt, &v, d, deltas, hbar);
    let relative_residual = relative(residual, d.norm());
    if relative_residual > RESIDUAL_TOLERANCE {
        return Err(Error::IllConditioned { relative_residual });
    }
    Ok(SteadyState {
        v_star: v,
        x_star: RVec::zeros(dim),
        residual,
        relative_residual,
        solver: SolverKind::Vectorized,
    })
}

/// Site `(q, p)` indices and `γ` of a local dephasing term.
fn local_dephaser(q: &LindbladQuadratic, n: usize) -> Option<(usize, usize, f64)> {
    let mut diag = Vec::new();
    for c in 0..2 * n {
        for r in 0..2 * n {
            let v = q.delta[(r, c)];
            if v != 0.0 {
                if r != c {
                    return None;
                }
                diag.push((r, v));
            }
        }
    }
    match diag.as_slice() {
        [(a, va), (b, vb)] if *a < n && *b == a + n && va == vb => Some((*a, *b, va * va)),
        _ => None,
    }
}

/// Extended steady state for local dephasing without forming the
/// `(2n)²`-dimensional system.
///
/// The dephasing map only reads the 2×2 block of each dephased site and
/// writes back into the same block, so `Δ_V(V) = Σ y_i F_i` with `y` the
/// `3d` local entries of `V`. Solving `(I − C) y = loc(lyap(D))` with
/// `C_ji = loc_j(lyap(F_i))` closes the system; the final `V` is one
/// more spectral solve.
pub fn solve_lyapunov_dephasing(
    gamma: &RMat,
    d: &RMat,
    deltas: &[LindbladQuadratic],
    hbar: f64,
) -> Result<SteadyState> {
    let dim = linalg::check_square(gamma)?;
    let n = dim / 2;
    linalg::check_shape(d, (dim, dim))?;
    linalg::check_finite(d, "diffusion matrix")?;
    let sites = deltas
        .iter()
        .map(|q| {
            linalg::check_shape(&q.delta, (dim, dim))?;
            local_dephaser(q, n)
                .ok_or_else(|| Error::NotApplicable("capacitance solver needs local number dephasing".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    require_stable(gamma)?;
    let gt = dressed_drift(gamma, deltas, hbar);
    require_stable(&gt)?;
    let sl = SpectralLyapunov::new(&gt)?;
    let v0 = sl.solve(d);

    // F_i as (row, col, coefficient) triples; i = 3s + {a, b, c}.
    let basis: Vec<Vec<(usize, usize, f64)>> = sites
        .iter()
        .flat_map(|&(q, p, g)| {
            let s = hbar * g;
            [vec![(p, p, s)], vec![(q, q, s)], vec![(q, p, -s), (p, q, -s)]]
        })
        .collect();
    let targets: Vec<(usize, usize)> = sites.iter().flat_map(|&(q, p, _)| [(q, q), (p, p), (q, p)]).collect();
    let m = targets.len();

    // x_{r,a} = S[r, :] ∘ S⁻¹[:, a];   lyap(E_ab)[r, c] = Re x_{r,a}ᵀ K x_{c,b}
    let rows: Vec<usize> = sites.iter().flat_map(|&(q, p, _)| [q, p]).collect();
    let cols: Vec<CMat> = sites
        .par_iter()
        .map(|&(q, p, _)| {
            let mut x = CMat::zeros(dim, 2 * rows.len());
            for (ai, &a) in [q, p].iter().enumerate() {
                for (ri, &r) in rows.iter().enumerate() {
                    let col = ai * rows.len() + ri;
                    for j in 0..dim {
                        x[(j, col)] = sl.s[(r, j)] * sl.s_inv[(j, a)];
                    }
                }
            }
            x
        })
        .collect();
    let kx: Vec<CMat> = cols.par_iter().map(|x| &sl.kernel * x).collect();
    let slot = |site: usize, idx: usize| usize::from(idx != sites[site].0);
    let row_slot = |r: usize| rows.iter().position(|&x| x == r).unwrap();

    let c_mat = RMat::from_fn(m, m, |ti, bi| {
        let (r, c) = targets[ti];
        let src_site = bi / 3;
        basis[bi]
            .iter()
            .map(|&(a, b, coef)| {
                let ai = slot(src_site, a);
                let bj = slot(src_site, b);
                let xa = cols[src_site].column(ai * rows.len() + row_slot(r));
                let yb = kx[src_site].column(bj * rows.len() + row_slot(c));
                coef * xa.iter().zip(yb.iter()).map(|(u, w)| u * w).sum::<Complex64>().re
            })
            .sum()
    });

    let lhs = RMat::identity(m, m) - c_mat;
    let rhs = RMat::from_iterator(m, 1, targets.iter().map(|&(r, c)| v0[(r, c)]));
    let y = linalg::solve_dense(&lhs, &rhs, "dephasing capacitance system")?;

    let mut q = d.clone();
    for (i, f) in basis.iter().enumerate() {
        for &(a, b, coef) in f {
            q[(a, b)] += y[i] * coef;
        }
    }
    let v = sl.solve(&q);
    let residual = extended_residual(&gt, &v, d, deltas, hbar);
    let relative_residual = relative(residual, d.norm());
    if relative_residual > RESIDUAL_TOLERANCE {
        return Err(Error::IllConditioned { relative_residual });
    }
    Ok(SteadyState {
        v_star: v,
        x_star: RVec::zeros(dim),
        residual,
        relative_residual,
        solver: SolverKind::Capacitance,
    })
}

/// `L⋆_jk = 1/(ζ + i(ν_j − ν_k))`.
pub fn l_star(frequencies: &[f64], zeta: f64) -> CMat {
    let n = frequencies.len();
    CMat::from_fn(n, n, |j, k| Complex64::new(zeta, frequencies[j] - frequencies[k]).inv())
}

/// Closed-form steady covariance of a uniform chain with common `ζ > 0`.
pub fn closed_form_vstar(sys: &System) -> Result<SteadyState> {
    let u = UniformChain::from_system(sys)?;
    if u.zeta.is_nan() || u.zeta <= 0.0 {
        return Err(Error::Unstable { max_real: 0.0 });
    }
    let dim = 2 * u.n;
    let v = RMat::identity(dim, dim) * (0.5 * u.hbar) + u.hadamard_blocks(&l_star(u.frequencies(), u.zeta));
    let g = &sys.generators;
    let x_star = steady_mean(&g.gamma, &sys.hamiltonian.xi, &g.eta)?;
    let residual = lyapunov_residual(&g.gamma, &v, &g.diffusion);
    Ok(SteadyState {
        relative_residual: relative(residual, g.diffusion.norm()),
        v_star: v,
        x_star,
        residual,
        solver: SolverKind::ClosedForm,
    })
}

/// `x⋆ = −Γ⁻¹(ξ − η)`.
pub fn steady_mean(gamma: &RMat, xi: &RVec, eta: &RVec) -> Result<RVec> {
    let dim = linalg::check_square(gamma)?;
    if xi.len() != dim || eta.len() != dim {
        return Err(Error::ShapeMismatch {
            expected: (dim, 1),
            found: (xi.len().max(eta.len()), 1),
        });
    }
    let rhs = RMat::from_iterator(dim, 1, (xi - eta).iter().map(|v| -v));
    let x = linalg::solve_dense(gamma, &rhs, "steady mean")?;
    Ok(RVec::from_iterator(dim, x.iter().copied()))
}

/// Parity pattern of stationary covariances of uniform chains: entries with
/// odd `j + k` vanish in the `qq`/`pp` blocks, entries with even `j + k`
/// vanish in the `qp`/`pq` blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckerboardReport {
    /// 1-based `(row, col)` positions in the full `2n × 2n` matrix.
    pub violations: Vec<(usize, usize)>,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl CheckerboardReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn checkerboard_validate(v: &RMat, layout: &PhaseSpaceLayout) -> Result<CheckerboardReport> {
    let n = layout.n();
    linalg::check_shape(v, (2 * n, 2 * n))?;
    let tolerance = 1e-10 * v.amax();
    let mut violations = Vec::new();
    let mut max_violation: f64 = 0.0;
    for r in 0..2 * n {
        for c in 0..2 * n {
            let (j, k) = (r % n, c % n);
            let same_block = (r < n) == (c < n);
            let odd = (j + k) % 2 == 1;
            if same_block == odd {
                let x = v[(r, c)].abs();
                max_violation = max_violation.max(x);
                if x > tolerance {
                    violations.push((r + 1, c + 1));
                }
            }
        }
    }
    Ok(CheckerboardReport {
        violations,
        max_violation,
        tolerance,
    })
}

/// Stationary state of a full system. With a nonzero mean the dephasing
/// map acts on the second moment `V + x xᵀ`, which shifts the effective
/// diffusion by `Δ_V(x⋆ x⋆ᵀ)`.
pub fn solve_steady_state(sys: &System, method: SteadyMethod) -> Result<SteadyState> {
    let g: &GeneratorSet = &sys.generators;
    let hbar = g.layout.hbar();
    let deltas = &g.quadratic;
    let gt = g.dressed_drift();
    require_stable(&g.gamma)?;
    require_stable(&gt)?;
    let x_star = steady_mean(&gt, &sys.hamiltonian.xi, &g.eta)?;
    let outer = &x_star * x_star.transpose();
    let d_eff = &g.diffusion + g.dephasing_term(&outer);

    let n = sys.n();
    let vectorized = || solve_lyapunov_vectorized(&g.gamma, &d_eff, deltas, hbar);
    let fallback = |e: Error| match e {
        Error::NearDefective { .. } | Error::IllConditioned { .. } if n <= VECTORIZED_AUTO_MAX_N => vectorized(),
        e => Err(e),
    };
    let mut st = match method {
        SteadyMethod::Auto if deltas.is_empty() => solve_lyapunov_spectral(&g.gamma, &d_eff).or_else(fallback)?,
        SteadyMethod::Auto => solve_lyapunov_dephasing(&g.gamma, &d_eff, deltas, hbar).or_else(fallback)?,
        SteadyMethod::Spectral if !deltas.is_empty() => {
            return Err(Error::NotApplicable("spectral solver excludes dephasing".into()))
        }
        SteadyMethod::Spectral => solve_lyapunov_spectral(&g.gamma, &d_eff)?,
        SteadyMethod::Vectorized => vectorized()?,
        SteadyMethod::Capacitance => solve_lyapunov_dephasing(&g.gamma, &d_eff, deltas, hbar)?,
        SteadyMethod::ClosedForm => closed_form_vstar(sys)?,
    };
    st.residual = extended_residual(&gt, &st.v_star, &d_eff, deltas, hbar);
    st.relative_residual = relative(st.residual, d_eff.norm());
    st.x_star = x_star;
    Ok(st)
}
