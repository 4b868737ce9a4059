//! Scenario presets, closed-form cross-checks and parameter sweeps.
//!
//! | preset     | chain                      | reservoirs                                           |
//! |------------|----------------------------|------------------------------------------------------|
//! | `baseline` | uniform hopping            | thermal everywhere plus diffusive A and B             |
//! | `caseI`    | uniform hopping            | thermal everywhere, hot ends, no diffusive baths      |
//! | `caseII`   | uniform hopping            | diffusive A and B only                                |
//! | `caseIII`  | uniform hopping            | thermal at the two ends plus diffusive A and B        |
//! | `caseIV`   | uniform hopping            | thermal at the two ends plus dephasing on every site  |
//! | `caseV`    | seeded random bonds        | as `baseline`                                         |
//! | `caseVI`   | spring-mass coupling       | as `baseline`                                         |

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bath, ChainEnd, ChainSpec, Coupling, ReservoirBank, ReservoirLabel, System};
use crate::steady::{solve_steady_state, stability_check, SteadyMethod};
use crate::thermo::{steady_transport, TransportReport};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioName {
    Baseline,
    CaseI,
    CaseII,
    CaseIII,
    CaseIV,
    CaseV,
    CaseVI,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::Baseline,
        ScenarioName::CaseI,
        ScenarioName::CaseII,
        ScenarioName::CaseIII,
        ScenarioName::CaseIV,
        ScenarioName::CaseV,
        ScenarioName::CaseVI,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Baseline => "baseline",
            ScenarioName::CaseI => "caseI",
            ScenarioName::CaseII => "caseII",
            ScenarioName::CaseIII => "caseIII",
            ScenarioName::CaseIV => "caseIV",
            ScenarioName::CaseV => "caseV",
            ScenarioName::CaseVI => "caseVI",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ScenarioName::Baseline => "uniform chain, thermal baths on every site, diffusive baths at both ends",
            ScenarioName::CaseI => "ordinary thermal baths only, hotter at the ends",
            ScenarioName::CaseII => "all-diffusive: only the end-chain diffusive baths (no steady state)",
            ScenarioName::CaseIII => "thermal baths at the two ends together with diffusive baths",
            ScenarioName::CaseIV => "thermal baths at the two ends and local dephasing on every site",
            ScenarioName::CaseV => "random nearest-neighbour couplings in (0, 1]",
            ScenarioName::CaseVI => "spring-mass (position-position) coupling",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', '-'], "");
        let name = match key.as_str() {
            "baseline" => ScenarioName::Baseline,
            "casei" | "case1" => ScenarioName::CaseI,
            "caseii" | "case2" => ScenarioName::CaseII,
            "caseiii" | "case3" => ScenarioName::CaseIII,
            "caseiv" | "case4" => ScenarioName::CaseIV,
            "casev" | "case5" => ScenarioName::CaseV,
            "casevi" | "case6" => ScenarioName::CaseVI,
            _ => return Err(Error::param("scenario", format!("unknown scenario `{s}`"))),
        };
        Ok(name)
    }
}

impl Serialize for ScenarioName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ScenarioName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameter overrides on top of a preset. Scalars adjust the preset's
/// recipe; the per-site and per-bond lists, when given, replace the
/// arrays the recipe would produce.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    /// Uniform hopping `Ω`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// Per-bond hopping `Ω_1..Ω_{n−1}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    /// Spring-mass constant `κ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Thermal rate on the sites the preset attaches baths to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zetas: Option<Vec<f64>>,
    /// Bulk thermal occupation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbars: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar_first: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar_last: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar_b: Option<f64>,
    /// Dephasing rate applied to the first `dephasers` sites.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dephasers: Option<usize>,
    /// Seed for random couplings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Attach {
    Everywhere,
    Ends,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Topology {
    Uniform,
    Random,
    SpringMass,
}

#[derive(Clone, Debug)]
struct Recipe {
    n: usize,
    omega: f64,
    hbar: f64,
    topology: Topology,
    coupling: f64,
    kappa: f64,
    attach: Attach,
    zeta: f64,
    nbar: f64,
    nbar_first: Option<f64>,
    nbar_last: Option<f64>,
    diffusive_a: Option<Bath>,
    diffusive_b: Option<Bath>,
    gamma: f64,
    dephasers: Option<usize>,
}

impl Recipe {
    fn base() -> Self {
        Recipe {
            n: 25,
            omega: 1.0,
            hbar: 1.0,
            topology: Topology::Uniform,
            coupling: 0.5,
            kappa: 0.5,
            attach: Attach::Everywhere,
            zeta: 0.1,
            nbar: 10.0,
            nbar_first: None,
            nbar_last: None,
            diffusive_a: Some(Bath::new(0.1, 100.0)),
            diffusive_b: Some(Bath::new(0.1, 50.0)),
            gamma: 0.0,
            dephasers: None,
        }
    }

    fn for_name(name: ScenarioName) -> Self {
        let base = Self::base();
        match name {
            ScenarioName::Baseline => base,
            ScenarioName::CaseI => Recipe {
                nbar: 30.0,
                nbar_first: Some(100.0),
                nbar_last: Some(50.0),
                diffusive_a: None,
                diffusive_b: None,
                ..base
            },
            ScenarioName::CaseII => Recipe { zeta: 0.0, ..base },
            ScenarioName::CaseIII => Recipe {
                attach: Attach::Ends,
                nbar_first: Some(10.0),
                nbar_last: Some(10.0),
                diffusive_a: Some(Bath::new(0.1, 90.0)),
                diffusive_b: Some(Bath::new(0.1, 40.0)),
                ..base
            },
            ScenarioName::CaseIV => Recipe {
                attach: Attach::Ends,
                nbar_first: Some(100.0),
                nbar_last: Some(50.0),
                diffusive_a: None,
                diffusive_b: None,
                gamma: 0.5,
                ..base
            },
            ScenarioName::CaseV => Recipe {
                topology: Topology::Random,
                ..base
            },
            ScenarioName::CaseVI => Recipe {
                topology: Topology::SpringMass,
                ..base
            },
        }
    }

    fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        set!(n, omega, hbar, coupling, kappa, zeta, nbar, gamma);
        if o.nbar_first.is_some() {
            self.nbar_first = o.nbar_first;
        }
        if o.nbar_last.is_some() {
            self.nbar_last = o.nbar_last;
        }
        if o.dephasers.is_some() {
            self.dephasers = o.dephasers;
        }
        for (end, rate, nbar) in [(ChainEnd::A, o.zeta_a, o.nbar_a), (ChainEnd::B, o.zeta_b, o.nbar_b)] {
            if rate.is_none() && nbar.is_none() {
                continue;
            }
            let slot = match end {
                ChainEnd::A => &mut self.diffusive_a,
                ChainEnd::B => &mut self.diffusive_b,
            };
            let cur = slot.unwrap_or_default();
            *slot = Some(Bath::new(rate.unwrap_or(cur.rate), nbar.unwrap_or(cur.nbar)));
        }
    }
}

fn list_len(field: &str, list: &[f64], expected: usize) -> Result<()> {
    if list.len() != expected {
        return Err(Error::param(
            field,
            format!("expected {expected} values, got {}", list.len()),
        ));
    }
    Ok(())
}

/// Uniform draws on `(0, 1]`: `1 − u` with `u` uniform on `[0, 1)` from a
/// ChaCha8 stream seeded with `seed`.
pub fn random_couplings(seed: u64, bonds: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..bonds).map(|_| 1.0 - rng.gen::<f64>()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioPreset {
    pub name: ScenarioName,
    pub chain: ChainSpec,
    pub bank: ReservoirBank,
    /// Seed used for random couplings, if any were drawn.
    pub seed: Option<u64>,
}

impl ScenarioPreset {
    pub fn system(&self) -> Result<System> {
        System::new(self.chain.clone(), self.bank.clone())
    }

    /// Overrides that pin every parameter of this preset explicitly.
    pub fn resolved_overrides(&self) -> Overrides {
        let (coupling, couplings, kappa) = match &self.chain.coupling {
            Coupling::Uniform(c) => (Some(*c), None, None),
            Coupling::PerBond(b) => (None, Some(b.clone()), None),
            Coupling::SpringMass(k) => (None, None, Some(*k)),
        };
        let a = self.bank.diffusive_a;
        let b = self.bank.diffusive_b;
        Overrides {
            n: Some(self.chain.n),
            omega: Some(self.chain.omega),
            hbar: Some(self.chain.hbar),
            coupling,
            couplings,
            kappa,
            zetas: Some(self.bank.thermal.iter().map(|t| t.rate).collect()),
            nbars: Some(self.bank.thermal.iter().map(|t| t.nbar).collect()),
            zeta_a: a.map(|x| x.rate),
            nbar_a: a.map(|x| x.nbar),
            zeta_b: b.map(|x| x.rate),
            nbar_b: b.map(|x| x.nbar),
            gammas: Some(self.bank.dephasing.clone()),
            seed: self.seed,
            ..Overrides::default()
        }
    }
}

pub fn preset(name: ScenarioName, overrides: &Overrides) -> Result<ScenarioPreset> {
    let mut r = Recipe::for_name(name);
    r.apply(overrides);
    let n = r.n;
    if n < 2 {
        return Err(Error::InvalidSize { n, min: 2 });
    }

    let mut seed = None;
    let coupling = if let Some(list) = &overrides.couplings {
        list_len("couplings", list, n - 1)?;
        seed = overrides.seed;
        Coupling::PerBond(list.clone())
    } else {
        match r.topology {
            Topology::Uniform if overrides.kappa.is_some() => Coupling::SpringMass(r.kappa),
            Topology::Uniform => Coupling::Uniform(r.coupling),
            Topology::SpringMass => Coupling::SpringMass(r.kappa),
            Topology::Random => {
                let s = overrides.seed.unwrap_or(DEFAULT_SEED);
                seed = Some(s);
                Coupling::PerBond(random_couplings(s, n - 1))
            }
        }
    };
    let chain = ChainSpec {
        n,
        omega: r.omega,
        coupling,
        hbar: r.hbar,
    };

    let mut bank = ReservoirBank::empty(n);
    for (k, bath) in bank.thermal.iter_mut().enumerate() {
        let attached = r.attach == Attach::Everywhere || k == 0 || k == n - 1;
        bath.rate = if attached { r.zeta } else { 0.0 };
        bath.nbar = r.nbar;
    }
    if let Some(v) = r.nbar_first {
        bank.thermal[0].nbar = v;
    }
    if let Some(v) = r.nbar_last {
        bank.thermal[n - 1].nbar = v;
    }
    if let Some(list) = &overrides.zetas {
        list_len("zetas", list, n)?;
        for (b, &z) in bank.thermal.iter_mut().zip(list) {
            b.rate = z;
        }
    }
    if let Some(list) = &overrides.nbars {
        list_len("nbars", list, n)?;
        for (b, &v) in bank.thermal.iter_mut().zip(list) {
            b.nbar = v;
        }
    }
    bank.diffusive_a = r.diffusive_a;
    bank.diffusive_b = r.diffusive_b;
    let dephasers = r.dephasers.unwrap_or(n);
    if dephasers > n {
        return Err(Error::param("dephasers", format!("at most n = {n}")));
    }
    for g in bank.dephasing.iter_mut().take(dephasers) {
        *g = r.gamma;
    }
    if let Some(list) = &overrides.gammas {
        list_len("gammas", list, n)?;
        bank.dephasing = list.clone();
    }
    chain.validate()?;
    bank.validate(n)?;
    Ok(ScenarioPreset {
        name,
        chain,
        bank,
        seed,
    })
}

/// Steady occupations and end currents from closed formulas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForms {
    pub occupations: Vec<f64>,
    /// Current entering at site 1 (thermal plus diffusive bath there).
    pub current_first: f64,
    /// Current entering at site n.
    pub current_last: f64,
}

fn check_closed_args(n: usize, zeta: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidSize { n, min: 3 });
    }
    if zeta.is_nan() || zeta <= 0.0 {
        return Err(Error::param("zeta", "must be positive"));
    }
    Ok(())
}

/// End-bath chain: occupations with effective end occupations
/// `Ñ_1`, `Ñ_n` (diffusive baths folded in) and the end currents.
pub fn case3_closed_forms(
    n_first: f64,
    n_last: f64,
    zeta: f64,
    coupling: f64,
    omega: f64,
    n: usize,
    hbar: f64,
) -> Result<ClosedForms> {
    case4_closed_forms(n_first, n_last, zeta, 0.0, coupling, omega, n, hbar)
}

/// End-bath chain with dephasing `γ` on every site.
#[allow(clippy::too_many_arguments)]
pub fn case4_closed_forms(
    n_first: f64,
    n_last: f64,
    zeta: f64,
    gamma: f64,
    coupling: f64,
    omega: f64,
    n: usize,
    hbar: f64,
) -> Result<ClosedForms> {
    check_closed_args(n, zeta)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::param("gamma", "must be non-negative"));
    }
    let g = hbar * gamma;
    let w2 = coupling * coupling;
    let mean = 0.5 * (n_first + n_last);
    let diff = n_first - n_last;
    let m = (n - 1) as f64;
    let den = 8.0 * w2 + 2.0 * zeta * zeta + 2.0 * m * g * zeta;
    let end = (zeta * zeta + m * g * zeta) * diff / den;
    let occupations = (1..=n)
        .map(|k| {
            if k == 1 {
                mean + end
            } else if k == n {
                mean - end
            } else {
                mean + (n as f64 - 2.0 * k as f64 + 1.0) * g * zeta * diff / den
            }
        })
        .collect();
    let current = 2.0 * hbar * omega * w2 * zeta * diff / (4.0 * w2 + zeta * zeta + m * g * zeta);
    Ok(ClosedForms {
        occupations,
        current_first: current,
        current_last: -current,
    })
}

/// Current entering at site 1: thermal bath plus diffusive bath A.
pub fn first_site_current(report: &TransportReport) -> f64 {
    report.currents.get(ReservoirLabel::Thermal(1)) + report.currents.get(ReservoirLabel::DiffusiveA)
}

/// Current entering at site n: thermal bath plus diffusive bath B.
pub fn last_site_current(report: &TransportReport, n: usize) -> f64 {
    report.currents.get(ReservoirLabel::Thermal(n)) + report.currents.get(ReservoirLabel::DiffusiveB)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// Number of dephased sites, counted from site 1.
    pub k: usize,
    /// Steady current entering at site 1.
    pub current: f64,
    /// Closed-form value where one exists (`k = 0` or `k = n`).
    pub closed_form: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub gamma: f64,
    pub method: SteadyMethod,
}

/// Current through an end-bath chain as dephasing is attached to the first
/// `k = 0..n` sites, for every `n` in `sizes`.
pub fn fourier_crossover_scan(
    sizes: &[usize],
    gamma: f64,
    base: &Overrides,
    method: SteadyMethod,
) -> Result<SweepResult> {
    let grid: Vec<(usize, usize)> = sizes.iter().flat_map(|&n| (0..=n).map(move |k| (n, k))).collect();
    let rows = grid
        .par_iter()
        .map(|&(n, k)| {
            let o = Overrides {
                n: Some(n),
                gamma: Some(gamma),
                dephasers: Some(k),
                ..base.clone()
            };
            let p = preset(ScenarioName::CaseIV, &o)?;
            let sys = p.system()?;
            let st = solve_steady_state(&sys, method)
                .map_err(|e| Error::NotApplicable(format!("sweep point n = {n}, k = {k}: {e}")))?;
            let report = TransportReport::steady(&sys, &st)?;
            let t1 = p.bank.thermal[0];
            let tn = p.bank.thermal[n - 1];
            let uniform_hop = p.chain.uniform_coupling();
            let closed = match (k, uniform_hop) {
                (0, Some(c)) => Some(case3_effective(&p, c)?.current_first),
                (k, Some(c)) if k == n => Some(
                    case4_closed_forms(t1.nbar, tn.nbar, t1.rate, gamma, c, p.chain.omega, n, p.chain.hbar)?
                        .current_first,
                ),
                _ => None,
            };
            Ok(SweepRow {
                n,
                k,
                current: first_site_current(&report),
                closed_form: closed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows, gamma, method })
}

/// Case-III closed forms for a preset, folding the diffusive baths into
/// effective end occupations.
pub fn case3_effective(p: &ScenarioPreset, coupling: f64) -> Result<ClosedForms> {
    let n = p.chain.n;
    let t1 = p.bank.thermal[0];
    let tn = p.bank.thermal[n - 1];
    if t1.rate != tn.rate {
        return Err(Error::NotApplicable("end rates must coincide".into()));
    }
    let zeta = t1.rate;
    let eff = |bath: Bath, end: ChainEnd| bath.nbar + p.bank.diffusive_drive(end) / zeta;
    case3_closed_forms(
        eff(t1, ChainEnd::A),
        eff(tn, ChainEnd::B),
        zeta,
        coupling,
        p.chain.omega,
        n,
        p.chain.hbar,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisorderStudy {
    pub seed: u64,
    pub couplings: Vec<f64>,
    pub report: TransportReport,
}

/// Steady transport of a chain with seeded random couplings.
pub fn disorder_study(seed: u64, n: usize, base: &Overrides) -> Result<DisorderStudy> {
    let o = Overrides {
        n: Some(n),
        seed: Some(seed),
        ..base.clone()
    };
    let p = preset(ScenarioName::CaseV, &o)?;
    let sys = p.system()?;
    let (_, report) = steady_transport(&sys, SteadyMethod::Auto)?;
    let couplings = match p.chain.coupling {
        Coupling::PerBond(b) => b,
        _ => unreachable!("caseV always draws per-bond couplings"),
    };
    Ok(DisorderStudy {
        seed,
        couplings,
        report,
    })
}

/// `ν'_m = √(ω(ω + κ) − ωκ cos((m − 1)π/n))`, `m = 1..n`.
pub fn smc_mode_frequencies(n: usize, omega: f64, kappa: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidSize { n, min: 1 });
    }
    Ok((1..=n)
        .map(|m| {
            let c = ((m - 1) as f64 * std::f64::consts::PI / n as f64).cos();
            (omega * (omega + kappa) - omega * kappa * c).sqrt()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmcStudy {
    pub report: TransportReport,
    /// `max |sorted Im λ(Γ) over the upper half-plane − sorted ν'|`.
    pub mode_deviation: f64,
    /// `max |Re λ(Γ) + ζ/2|`.
    pub damping_deviation: f64,
}

/// Steady transport of the spring-mass chain, with a check of the drift
/// spectrum against the mode law.
pub fn smc_study(n: usize, kappa: f64, base: &Overrides) -> Result<SmcStudy> {
    let o = Overrides {
        n: Some(n),
        kappa: Some(kappa),
        ..base.clone()
    };
    let p = preset(ScenarioName::CaseVI, &o)?;
    let sys = p.system()?;
    let zeta = p
        .bank
        .uniform_rate()
        .ok_or_else(|| Error::NotApplicable("mode check needs a common thermal rate".into()))?;
    let spec = stability_check(&sys.generators.gamma)?;
    let mut imag: Vec<f64> = spec.eigenvalues.iter().map(|z| z.im).filter(|&v| v > 0.0).collect();
    imag.sort_by(f64::total_cmp);
    let mut modes = smc_mode_frequencies(n, p.chain.omega, kappa)?;
    modes.sort_by(f64::total_cmp);
    let mode_deviation = if imag.len() == modes.len() {
        imag.iter().zip(&modes).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let damping_deviation = spec
        .eigenvalues
        .iter()
        .map(|z| (z.re + 0.5 * zeta).abs())
        .fold(0.0, f64::max);
    let (_, report) = steady_transport(&sys, SteadyMethod::Auto)?;
    Ok(SmcStudy {
        report,
        mode_deviation,
        damping_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn names_round_trip() {
        for name in ScenarioName::ALL {
            assert_eq!(name.as_str().parse::<ScenarioName>().unwrap(), name);
        }
        assert_eq!("case_iv".parse::<ScenarioName>().unwrap(), ScenarioName::CaseIV);
        assert!("case7".parse::<ScenarioName>().is_err());
    }

    #[test]
    fn baseline_diffusion_corner() {
        let sys = preset(ScenarioName::Baseline, &Overrides::default())
            .unwrap()
            .system()
            .unwrap();
        assert_abs_diff_eq!(sys.generators.diffusion[(0, 0)], 11.05, epsilon = 1e-12);
    }

    #[test]
    fn case_one_has_no_diffusive_part() {
        let p = preset(ScenarioName::CaseI, &Overrides::default()).unwrap();
        assert!(p.bank.diffusive_a.is_none() && p.bank.diffusive_b.is_none());
        assert_eq!(p.bank.thermal[0].nbar, 100.0);
        assert_eq!(p.bank.thermal[24].nbar, 50.0);
        assert_eq!(p.bank.thermal[12].nbar, 30.0);
    }

    #[test]
    fn case_three_effective_occupations() {
        let p = preset(ScenarioName::CaseIII, &Overrides::default()).unwrap();
        let cf = case3_effective(&p, 0.5).unwrap();
        assert_abs_diff_eq!(cf.occupations[12], 75.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cf.current_first, 2.5 / 1.01, epsilon = 1e-12);
        assert_abs_diff_eq!(cf.current_first + cf.current_last, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn seeded_couplings_are_reproducible() {
        let o = Overrides {
            seed: Some(42),
            ..Overrides::default()
        };
        let a = preset(ScenarioName::CaseV, &o).unwrap();
        let b = preset(ScenarioName::CaseV, &o).unwrap();
        assert_eq!(a.chain, b.chain);
        let Coupling::PerBond(bonds) = &a.chain.coupling else {
            panic!()
        };
        assert!(bonds.iter().all(|&c| c > 0.0 && c <= 1.0));
        let c = preset(ScenarioName::CaseV, &Overrides { seed: Some(43), ..o }).unwrap();
        assert_ne!(a.chain, c.chain);
    }

    #[test]
    fn resolved_overrides_reproduce_preset() {
        for name in ScenarioName::ALL {
            let p = preset(
                name,
                &Overrides {
                    n: Some(6),
                    ..Overrides::default()
                },
            )
            .unwrap();
            let again = preset(name, &p.resolved_overrides()).unwrap();
            assert_eq!(p, again, "{name}");
        }
    }

    #[test]
    fn closed_forms_equilibrium_and_limit() {
        let eq = case4_closed_forms(7.0, 7.0, 0.1, 0.5, 0.5, 1.0, 6, 1.0).unwrap();
        assert!(eq.occupations.iter().all(|&o| (o - 7.0).abs() < 1e-14));
        assert_eq!(eq.current_first, 0.0);
        let a = case4_closed_forms(100.0, 50.0, 0.1, 0.0, 0.5, 1.0, 6, 1.0).unwrap();
        let b = case3_closed_forms(100.0, 50.0, 0.1, 0.5, 1.0, 6, 1.0).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(b.current_first, 2.0 * 0.25 * 0.1 * 50.0 / 1.01, epsilon = 1e-13);
        assert_abs_diff_eq!(b.occupations[0], 75.0 + 0.5 / 2.02, epsilon = 1e-12);
        assert_abs_diff_eq!(b.occupations[3], 75.0, epsilon = 1e-12);
    }

    #[test]
    fn smc_modes_collapse_without_coupling() {
        for nu in smc_mode_frequencies(8, 1.3, 0.0).unwrap() {
            assert_abs_diff_eq!(nu, 1.3, epsilon = 1e-15);
        }
    }

    #[test]
    fn list_overrides_checked() {
        let o = Overrides {
            zetas: Some(vec![0.1; 3]),
            ..Overrides::default()
        };
        assert!(preset(ScenarioName::Baseline, &o).is_err());
    }
}
