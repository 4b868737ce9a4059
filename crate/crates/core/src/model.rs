//! Chain and reservoir specifications, and their translation into the
//! drift/diffusion generators of the moment equations.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gaussian::PhaseSpaceLayout;
use crate::linalg;
use crate::{CMat, CVec, RMat, RVec};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Rotating-wave hopping with one constant `Ω` on every bond.
    Uniform(f64),
    /// Rotating-wave hopping with `Ω_j` on bond `(j, j+1)`; length `n - 1`.
    PerBond(Vec<f64>),
    /// Position-position spring coupling with constant `κ`.
    SpringMass(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub omega: f64,
    pub coupling: Coupling,
    pub hbar: f64,
}

impl ChainSpec {
    pub fn uniform(n: usize, omega: f64, coupling: f64) -> Self {
        ChainSpec {
            n,
            omega,
            coupling: Coupling::Uniform(coupling),
            hbar: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSize { n: self.n, min: 2 });
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::param("omega", "must be positive and finite"));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::param("hbar", "must be positive and finite"));
        }
        match &self.coupling {
            Coupling::Uniform(c) | Coupling::SpringMass(c) if !c.is_finite() => {
                Err(Error::param("coupling", "must be finite"))
            }
            Coupling::PerBond(bonds) if bonds.len() != self.n - 1 => Err(Error::param(
                "couplings",
                format!("expected {} bonds, got {}", self.n - 1, bonds.len()),
            )),
            Coupling::PerBond(bonds) if bonds.iter().any(|c| !c.is_finite()) => {
                Err(Error::param("couplings", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn layout(&self) -> Result<PhaseSpaceLayout> {
        PhaseSpaceLayout::new(self.n, self.hbar)
    }

    /// The uniform rotating-wave hopping constant, if that is the topology.
    pub fn uniform_coupling(&self) -> Option<f64> {
        match self.coupling {
            Coupling::Uniform(c) => Some(c),
            _ => None,
        }
    }
}

/// A bath coupling rate together with its mean occupation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bath {
    pub rate: f64,
    pub nbar: f64,
}

impl Bath {
    pub fn new(rate: f64, nbar: f64) -> Self {
        Bath { rate, nbar }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(Error::param(format!("{field}.rate"), "must be finite and non-negative"));
        }
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(Error::param(format!("{field}.nbar"), "must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainEnd {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirBank {
    /// One thermal bath per site (rate zero means detached).
    pub thermal: Vec<Bath>,
    /// All-diffusive bath on site 1.
    pub diffusive_a: Option<Bath>,
    /// All-diffusive bath on site n.
    pub diffusive_b: Option<Bath>,
    /// Dephasing rate `γ_m` per site.
    pub dephasing: Vec<f64>,
}

impl ReservoirBank {
    pub fn empty(n: usize) -> Self {
        ReservoirBank {
            thermal: vec![Bath::default(); n],
            diffusive_a: None,
            diffusive_b: None,
            dephasing: vec![0.0; n],
        }
    }

    pub fn uniform(n: usize, rate: f64, nbar: f64) -> Self {
        ReservoirBank {
            thermal: vec![Bath::new(rate, nbar); n],
            ..Self::empty(n)
        }
    }

    pub fn n(&self) -> usize {
        self.thermal.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.thermal.len() != n {
            return Err(Error::param(
                "thermal",
                format!("expected {n} baths, got {}", self.thermal.len()),
            ));
        }
        if self.dephasing.len() != n {
            return Err(Error::param(
                "dephasing",
                format!("expected {n} rates, got {}", self.dephasing.len()),
            ));
        }
        for (k, b) in self.thermal.iter().enumerate() {
            b.validate(&format!("thermal[{}]", k + 1))?;
        }
        if let Some(b) = &self.diffusive_a {
            b.validate("diffusive_a")?;
        }
        if let Some(b) = &self.diffusive_b {
            b.validate("diffusive_b")?;
        }
        for (m, &g) in self.dephasing.iter().enumerate() {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::param(
                    format!("dephasing[{}]", m + 1),
                    "must be finite and non-negative",
                ));
            }
        }
        Ok(())
    }

    /// Common thermal rate when every site carries the same one.
    pub fn uniform_rate(&self) -> Option<f64> {
        let first = self.thermal.first()?.rate;
        self.thermal.iter().all(|b| b.rate == first).then_some(first)
    }

    pub fn has_dephasing(&self) -> bool {
        self.dephasing.iter().any(|&g| g > 0.0)
    }

    pub fn has_thermal(&self) -> bool {
        self.thermal.iter().any(|b| b.rate > 0.0)
    }

    fn diffusive(&self, end: ChainEnd) -> Bath {
        match end {
            ChainEnd::A => self.diffusive_a,
            ChainEnd::B => self.diffusive_b,
        }
        .unwrap_or_default()
    }

    /// `ζ_A N̄_A` (resp. B), zero when the bath is absent.
    pub fn diffusive_drive(&self, end: ChainEnd) -> f64 {
        let b = self.diffusive(end);
        b.rate * b.nbar
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub h: RMat,
    pub xi: RVec,
    pub h0: f64,
}

/// Identity of the reservoir a Lindblad term belongs to. Sites are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReservoirLabel {
    Thermal(usize),
    DiffusiveA,
    DiffusiveB,
    Dephasing(usize),
}

impl fmt::Display for ReservoirLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReservoirLabel::Thermal(k) => write!(f, "thermal_{k}"),
            ReservoirLabel::DiffusiveA => f.write_str("diffusive_a"),
            ReservoirLabel::DiffusiveB => f.write_str("diffusive_b"),
            ReservoirLabel::Dephasing(m) => write!(f, "dephasing_{m}"),
        }
    }
}

impl Serialize for ReservoirLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `L = λ·Jx + μ` (bilinear, no conjugation).
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladLinear {
    pub lambda: CVec,
    pub mu: Complex64,
    pub label: ReservoirLabel,
}

impl LindbladLinear {
    pub fn upsilon(&self) -> CMat {
        &self.lambda * self.lambda.adjoint()
    }
}

/// `L = ½ x·Δx` with real symmetric `Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladQuadratic {
    pub delta: RMat,
    pub scale: f64,
    pub label: ReservoirLabel,
}

impl LindbladQuadratic {
    /// `JΔ`.
    pub fn j_delta(&self) -> RMat {
        let n = self.delta.nrows() / 2;
        let mut out = RMat::zeros(2 * n, 2 * n);
        for c in 0..2 * n {
            for r in 0..n {
                out[(r, c)] = self.delta[(r + n, c)];
                out[(r + n, c)] = -self.delta[(r, c)];
            }
        }
        out
    }
}

fn nonzeros(a: &RMat) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            let v = a[(r, c)];
            if v != 0.0 {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// Everything the moment equations need.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub layout: PhaseSpaceLayout,
    /// `Γ = JH − Im Υ·J` (linear Lindblads only).
    pub gamma: RMat,
    /// `D = ħ Re Υ`.
    pub diffusion: RMat,
    pub upsilon: CMat,
    pub eta: RVec,
    pub linear: Vec<LindbladLinear>,
    pub quadratic: Vec<LindbladQuadratic>,
}

impl GeneratorSet {
    /// `Γ̃ = Γ + (ħ/2) Σ (JΔ)²`, equal to `Γ` without quadratic terms.
    pub fn dressed_drift(&self) -> RMat {
        let half = 0.5 * self.layout.hbar();
        let mut g = self.gamma.clone();
        for q in &self.quadratic {
            let jd = q.j_delta();
            g += (&jd * &jd) * half;
        }
        g
    }

    /// `Δ_V(M) = ħ Σ JΔ M (JΔ)ᵀ`.
    pub fn dephasing_term(&self, m: &RMat) -> RMat {
        let d = self.layout.dim();
        let mut out = RMat::zeros(d, d);
        for q in &self.quadratic {
            add_congruence(&mut out, &nonzeros(&q.j_delta()), m, self.layout.hbar());
        }
        out
    }

    pub fn has_dephasing(&self) -> bool {
        !self.quadratic.is_empty()
    }
}

/// `out += s · A M Aᵀ` with `A` given by its nonzero entries.
pub(crate) fn add_congruence(out: &mut RMat, a: &[(usize, usize, f64)], m: &RMat, s: f64) {
    for &(r1, c1, v1) in a {
        for &(r2, c2, v2) in a {
            out[(r1, r2)] += s * v1 * m[(c1, c2)] * v2;
        }
    }
}

pub fn build_adjacency(spec: &ChainSpec) -> Result<HamiltonianSpec> {
    spec.validate()?;
    let n = spec.n;
    let w = spec.omega;
    let h = match &spec.coupling {
        Coupling::Uniform(c) => {
            let blk = hopping_block(w, &vec![*c; n - 1]);
            linalg::direct_sum(&blk, &blk)
        }
        Coupling::PerBond(bonds) => {
            let blk = hopping_block(w, bonds);
            linalg::direct_sum(&blk, &blk)
        }
        Coupling::SpringMass(kappa) => {
            let mut blk = RMat::from_fn(n, n, |j, k| {
                if j == k {
                    w + kappa
                } else if j.abs_diff(k) == 1 {
                    -0.5 * kappa
                } else {
                    0.0
                }
            });
            blk[(0, 0)] -= 0.5 * kappa;
            blk[(n - 1, n - 1)] -= 0.5 * kappa;
            linalg::direct_sum(&blk, &(RMat::identity(n, n) * w))
        }
    };
    Ok(HamiltonianSpec {
        h,
        xi: RVec::zeros(2 * n),
        h0: 0.0,
    })
}

fn hopping_block(omega: f64, bonds: &[f64]) -> RMat {
    let n = bonds.len() + 1;
    let mut blk = RMat::identity(n, n) * omega;
    for (j, &c) in bonds.iter().enumerate() {
        blk[(j, j + 1)] = c;
        blk[(j + 1, j)] = c;
    }
    blk
}

fn site_vector(layout: &PhaseSpaceLayout, site: usize, q: Complex64, p: Complex64) -> Result<CVec> {
    let mut v = CVec::zeros(layout.dim());
    v[layout.q_index(site)?] = q;
    v[layout.p_index(site)?] = p;
    Ok(v)
}

/// Damping and pumping Lindblad vectors of a thermal bath on `site`.
pub fn thermal_lindblad_pair(
    site: usize,
    bath: Bath,
    layout: &PhaseSpaceLayout,
) -> Result<(LindbladLinear, LindbladLinear)> {
    bath.validate("thermal")?;
    let down = (0.5 * bath.rate * (bath.nbar + 1.0)).sqrt();
    let up = (0.5 * bath.rate * bath.nbar).sqrt();
    let label = ReservoirLabel::Thermal(site);
    let lambda = site_vector(layout, site, I * down, Complex64::from(-down))?;
    let lambda_up = site_vector(layout, site, -I * up, Complex64::from(-up))?;
    Ok((
        LindbladLinear {
            lambda,
            mu: Complex64::new(0.0, 0.0),
            label,
        },
        LindbladLinear {
            lambda: lambda_up,
            mu: Complex64::new(0.0, 0.0),
            label,
        },
    ))
}

/// All-diffusive bath on an end of the chain, in the high-occupation form
/// where damping and pumping rates coincide.
pub fn diffusive_lindblad(
    end: ChainEnd,
    bath: Bath,
    layout: &PhaseSpaceLayout,
) -> Result<(LindbladLinear, LindbladLinear)> {
    let (site, label, field) = match end {
        ChainEnd::A => (1, ReservoirLabel::DiffusiveA, "diffusive_a"),
        ChainEnd::B => (layout.n(), ReservoirLabel::DiffusiveB, "diffusive_b"),
    };
    bath.validate(field)?;
    let c = (0.5 * bath.rate * bath.nbar).sqrt();
    let lambda = site_vector(layout, site, I * c, Complex64::from(-c))?;
    let lambda_up = site_vector(layout, site, -I * c, Complex64::from(-c))?;
    Ok((
        LindbladLinear {
            lambda,
            mu: Complex64::new(0.0, 0.0),
            label,
        },
        LindbladLinear {
            lambda: lambda_up,
            mu: Complex64::new(0.0, 0.0),
            label,
        },
    ))
}

/// Local dephasing on site `m`: `Δ = √γ (E_mm + E_{m+n,m+n})`.
pub fn dephasing_quadratic(site: usize, gamma: f64, layout: &PhaseSpaceLayout) -> Result<LindbladQuadratic> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::param("dephasing", "must be finite and non-negative"));
    }
    let scale = gamma.sqrt();
    let mut delta = RMat::zeros(layout.dim(), layout.dim());
    delta[(layout.q_index(site)?, layout.q_index(site)?)] = scale;
    delta[(layout.p_index(site)?, layout.p_index(site)?)] = scale;
    Ok(LindbladQuadratic {
        delta,
        scale,
        label: ReservoirLabel::Dephasing(site),
    })
}

/// Collects every Lindblad term of the bank and forms `Γ`, `D`, `Υ`, `η`.
/// Reservoirs with zero rate are omitted.
pub fn assemble_generators(
    ham: &HamiltonianSpec,
    bank: &ReservoirBank,
    layout: &PhaseSpaceLayout,
) -> Result<GeneratorSet> {
    let n = layout.n();
    let d = layout.dim();
    linalg::check_shape(&ham.h, (d, d))?;
    if ham.xi.len() != d {
        return Err(Error::ShapeMismatch {
            expected: (d, 1),
            found: (ham.xi.len(), 1),
        });
    }
    linalg::check_finite(&ham.h, "Hamiltonian")?;
    bank.validate(n)?;

    let mut linear = Vec::new();
    for (k, bath) in bank.thermal.iter().enumerate() {
        if bath.rate > 0.0 {
            let (a, b) = thermal_lindblad_pair(k + 1, *bath, layout)?;
            linear.push(a);
            linear.push(b);
        }
    }
    for (end, bath) in [(ChainEnd::A, bank.diffusive_a), (ChainEnd::B, bank.diffusive_b)] {
        if let Some(bath) = bath.filter(|b| b.rate > 0.0) {
            let (a, b) = diffusive_lindblad(end, bath, layout)?;
            linear.push(a);
            linear.push(b);
        }
    }
    let mut quadratic = Vec::new();
    for (m, &g) in bank.dephasing.iter().enumerate() {
        if g > 0.0 {
            quadratic.push(dephasing_quadratic(m + 1, g, layout)?);
        }
    }

    let mut upsilon = CMat::zeros(d, d);
    let mut eta = RVec::zeros(d);
    for l in &linear {
        upsilon += l.upsilon();
        eta += l.lambda.map(|z| (l.mu.conj() * z).im);
    }
    let j = layout.symplectic();
    let gamma = &j * &ham.h - upsilon.map(|z| z.im) * &j;
    let diffusion = upsilon.map(|z| z.re) * layout.hbar();

    Ok(GeneratorSet {
        layout: *layout,
        gamma,
        diffusion,
        upsilon,
        eta,
        linear,
        quadratic,
    })
}

/// Bose-Einstein occupation `1/(e^{ħβω} − 1)`.
pub fn nbar_from_temperature(beta: f64, omega: f64, hbar: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::param("beta", "must be positive"));
    }
    if !(omega > 0.0 && hbar > 0.0) {
        return Err(Error::param("omega", "omega and hbar must be positive"));
    }
    Ok(1.0 / (hbar * beta * omega).exp_m1())
}

/// A fully assembled chain with its reservoirs.
#[derive(Clone, Debug)]
pub struct System {
    pub chain: ChainSpec,
    pub bank: ReservoirBank,
    pub hamiltonian: HamiltonianSpec,
    pub generators: GeneratorSet,
}

impl System {
    pub fn new(chain: ChainSpec, bank: ReservoirBank) -> Result<Self> {
        let hamiltonian = build_adjacency(&chain)?;
        let layout = chain.layout()?;
        let generators = assemble_generators(&hamiltonian, &bank, &layout)?;
        Ok(System {
            chain,
            bank,
            hamiltonian,
            generators,
        })
    }

    pub fn layout(&self) -> PhaseSpaceLayout {
        self.generators.layout
    }

    pub fn n(&self) -> usize {
        self.chain.n
    }
}
