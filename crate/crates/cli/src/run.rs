//! Command execution: build the system, compute, and collect tables.

use std::path::{Path, PathBuf};

use qchain::gaussian::toeplitz_mode_frequencies;
use qchain::model::{Coupling, ReservoirLabel};
use qchain::propagator::{evolve_system, Provenance};
use qchain::scenarios::{first_site_current, fourier_crossover_scan, preset, smc_mode_frequencies, ScenarioPreset};
use qchain::steady::stability_check;
use qchain::thermo::steady_transport;
use qchain::{GaussianState, RMat, SteadyState, System, TransportReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Format, Mode, RunConfig, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::table::{write_atomic, Cell, Table};

pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Debug)]
pub struct Outcome {
    pub mode: Mode,
    /// Configuration that reproduces this run.
    pub resolved: RunConfig,
    pub tables: Vec<Table>,
    pub summary: Value,
    pub diagnostics: Value,
}

impl Outcome {
    pub fn report(&self) -> Value {
        let tables: serde_json::Map<String, Value> =
            self.tables.iter().map(|t| (t.name.clone(), t.to_json())).collect();
        json!({
            "provenance": {
                "tool": "qchain",
                "version": env!("CARGO_PKG_VERSION"),
                "command": self.mode.as_str(),
                "config": self.resolved,
            },
            "diagnostics": self.diagnostics,
            "summary": self.summary,
            "tables": tables,
        })
    }

    /// Writes one CSV per table and/or `report.json`; returns the paths.
    pub fn write(&self, dir: &Path, format: Format) -> CliResult<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        if format.csv() {
            for t in &self.tables {
                let path = dir.join(format!("{}.csv", t.name));
                write_atomic(&path, &t.to_csv()?)?;
                written.push(path);
            }
        }
        if format.json() {
            let path = dir.join(REPORT_FILE);
            let mut text = serde_json::to_string_pretty(&self.report()).expect("report serializes");
            text.push('\n');
            write_atomic(&path, text.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn execute(mode: Mode, cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.check_schema(mode)?;
    let outcome = match mode {
        Mode::Steady => steady(cfg)?,
        Mode::Evolve => evolve(cfg)?,
        Mode::Spectrum => spectrum(cfg)?,
        Mode::Sweep => sweep(cfg)?,
    };
    for t in &outcome.tables {
        t.check_finite()?;
    }
    Ok(outcome)
}

fn build(cfg: &RunConfig) -> CliResult<(ScenarioPreset, System)> {
    let p = preset(cfg.scenario, &cfg.overrides_with_seed())?;
    let sys = p.system()?;
    Ok((p, sys))
}

/// Every parameter of the preset pinned explicitly, output location dropped.
fn resolve(cfg: &RunConfig, mode: Mode, p: &ScenarioPreset) -> RunConfig {
    let mut overrides = p.resolved_overrides();
    overrides.seed = None;
    RunConfig {
        mode: Some(mode),
        seed: p.seed,
        overrides,
        output: None,
        ..cfg.clone()
    }
}

fn checked_steady(sys: &System, cfg: &RunConfig) -> CliResult<(SteadyState, TransportReport)> {
    let (st, report) = steady_transport(sys, cfg.solver.method)?;
    if st.relative_residual > cfg.solver.residual_tolerance {
        return Err(CliError::Solver(format!(
            "stationary residual {:e} exceeds tolerance {:e}",
            st.relative_residual, cfg.solver.residual_tolerance
        )));
    }
    Ok((st, report))
}

fn steady(cfg: &RunConfig) -> CliResult<Outcome> {
    let (p, sys) = build(cfg)?;
    let (st, report) = checked_steady(&sys, cfg)?;
    let n = sys.n();
    let mut sites = Table::new("steady_sites", &["site", "occupation", "current"]);
    for k in 1..=n {
        sites.push(vec![
            k.into(),
            report.occupations[k - 1].into(),
            report.currents.get(ReservoirLabel::Thermal(k)).into(),
        ]);
    }
    let mut reservoirs = Table::new("steady_reservoirs", &["reservoir", "current"]);
    for (label, j) in &report.currents.per_reservoir {
        reservoirs.push(vec![label.to_string().into(), (*j).into()]);
    }
    Ok(Outcome {
        mode: Mode::Steady,
        resolved: resolve(cfg, Mode::Steady, &p),
        tables: vec![sites, reservoirs],
        summary: json!({
            "mean_energy": report.mean_energy,
            "total_current": report.currents.total,
            "diffusive_part": report.currents.diffusive_part,
        }),
        diagnostics: json!({
            "solver": st.solver,
            "residual": st.residual,
            "relative_residual": st.relative_residual,
            "residual_tolerance": cfg.solver.residual_tolerance,
        }),
    })
}

fn evolve(cfg: &RunConfig) -> CliResult<Outcome> {
    let ev = cfg.evolve.as_ref().expect("checked by schema");
    let (p, sys) = build(cfg)?;
    let layout = sys.layout();
    let initial = match ev.initial_nbar {
        Some(v) => GaussianState::thermal(&layout, v),
        None => GaussianState::vacuum(&layout),
    };
    let traj = evolve_system(&sys, &initial, &ev.times, ev.dt)?;
    let n = sys.n();
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=n).map(|k| format!("occupation_{k}")));
    columns.extend(["mean_energy".to_string(), "total_current".to_string()]);
    let mut table = Table::with_columns("evolve", columns);
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let r = TransportReport::at(&sys, state, Some(*t))?;
        let mut row: Vec<Cell> = vec![(*t).into()];
        row.extend(r.occupations.iter().map(|&v| Cell::Float(v)));
        row.extend([r.mean_energy.into(), r.currents.total.into()]);
        table.push(row);
    }
    let integrator = match traj.provenance {
        Provenance::ClosedForm => json!({"kind": "closed_form"}),
        Provenance::Rk4 { dt } => json!({"kind": "rk4", "dt": dt}),
    };
    Ok(Outcome {
        mode: Mode::Evolve,
        resolved: resolve(cfg, Mode::Evolve, &p),
        tables: vec![table],
        summary: json!({ "samples": traj.times.len() }),
        diagnostics: json!({ "integrator": integrator }),
    })
}

fn spectrum_table(name: &str, gamma: &RMat) -> CliResult<(Table, Value)> {
    let report = stability_check(gamma)?;
    let mut ev = report.eigenvalues.clone();
    ev.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    let mut t = Table::new(name, &["index", "re", "im"]);
    for (i, z) in ev.iter().enumerate() {
        t.push(vec![(i + 1).into(), z.re.into(), z.im.into()]);
    }
    let info = json!({ "stable": report.stable, "spectral_gap": report.spectral_gap });
    Ok((t, info))
}

fn spectrum(cfg: &RunConfig) -> CliResult<Outcome> {
    let (p, sys) = build(cfg)?;
    let g = &sys.generators;
    let (drift, drift_info) = spectrum_table("spectrum", &g.gamma)?;
    let mut tables = vec![drift];
    let mut summary = json!({ "drift": drift_info });
    if g.has_dephasing() {
        let (dressed, info) = spectrum_table("spectrum_dressed", &g.dressed_drift())?;
        tables.push(dressed);
        summary["dressed_drift"] = info;
    }
    let chain = &sys.chain;
    let modes = match &chain.coupling {
        Coupling::Uniform(c) => Some(toeplitz_mode_frequencies(chain.n, chain.omega, *c)?),
        Coupling::SpringMass(k) => Some(smc_mode_frequencies(chain.n, chain.omega, *k)?),
        Coupling::PerBond(_) => None,
    };
    if let Some(freqs) = modes {
        let mut t = Table::new("modes", &["mode", "frequency"]);
        for (m, f) in freqs.iter().enumerate() {
            t.push(vec![(m + 1).into(), (*f).into()]);
        }
        tables.push(t);
    }
    Ok(Outcome {
        mode: Mode::Spectrum,
        resolved: resolve(cfg, Mode::Spectrum, &p),
        tables,
        summary,
        diagnostics: json!({}),
    })
}

fn sweep(cfg: &RunConfig) -> CliResult<Outcome> {
    let spec = cfg.sweep.as_ref().expect("checked by schema");
    let base = cfg.overrides_with_seed();
    // Validate the base preset once so that parameter errors surface as
    // configuration errors rather than per-point failures.
    preset(cfg.scenario, &base)?;
    let mut table;
    let mut diagnostics = json!({});
    match spec {
        SweepConfig::Crossover { sizes, gamma } => {
            let scan = fourier_crossover_scan(sizes, *gamma, &base, cfg.solver.method)?;
            table = Table::new("sweep", &["n", "k", "current", "closed_form"]);
            for r in &scan.rows {
                table.push(vec![r.n.into(), r.k.into(), r.current.into(), r.closed_form.into()]);
            }
        }
        SweepConfig::Size { sizes } => {
            table = Table::new(
                "sweep",
                &[
                    "n",
                    "mean_energy",
                    "thermal_sum",
                    "diffusive_sum",
                    "internal_sum",
                    "first_current",
                    "mid_occupation",
                ],
            );
            let rows = sizes
                .par_iter()
                .map(|&n| {
                    let o = qchain::scenarios::Overrides {
                        n: Some(n),
                        ..base.clone()
                    };
                    let sys = preset(cfg.scenario, &o)?.system()?;
                    let (st, r) = checked_steady(&sys, cfg)?;
                    let c = &r.currents;
                    let row = vec![
                        n.into(),
                        r.mean_energy.into(),
                        c.thermal_sum(1..=n).into(),
                        (c.get(ReservoirLabel::DiffusiveA) + c.get(ReservoirLabel::DiffusiveB)).into(),
                        c.thermal_sum(2..=n - 1).into(),
                        first_site_current(&r).into(),
                        r.occupations[n.div_ceil(2) - 1].into(),
                    ];
                    Ok((row, st.relative_residual))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
            diagnostics = json!({ "max_relative_residual": worst });
            for (row, _) in rows {
                table.push(row);
            }
        }
        SweepConfig::Seeds { seeds } => {
            table = Table::new("sweep", &["seed", "site", "occupation", "current"]);
            let blocks = seeds
                .par_iter()
                .map(|&seed| {
                    let o = qchain::scenarios::Overrides {
                        seed: Some(seed),
                        ..base.clone()
                    };
                    let sys = preset(cfg.scenario, &o)?.system()?;
                    let (st, r) = checked_steady(&sys, cfg)?;
                    let rows: Vec<Vec<Cell>> = (1..=sys.n())
                        .map(|k| {
                            vec![
                                seed.into(),
                                k.into(),
                                r.occupations[k - 1].into(),
                                r.currents.get(ReservoirLabel::Thermal(k)).into(),
                            ]
                        })
                        .collect();
                    Ok((rows, st.relative_residual))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let worst = blocks.iter().map(|b| b.1).fold(0.0, f64::max);
            diagnostics = json!({ "max_relative_residual": worst });
            for (rows, _) in blocks {
                for row in rows {
                    table.push(row);
                }
            }
        }
    }
    let resolved = RunConfig {
        mode: Some(Mode::Sweep),
        seed: base.seed,
        overrides: qchain::scenarios::Overrides { seed: None, ..base },
        output: None,
        ..cfg.clone()
    };
    Ok(Outcome {
        mode: Mode::Sweep,
        resolved,
        summary: json!({ "points": table.rows.len() }),
        tables: vec![table],
        diagnostics,
    })
}
