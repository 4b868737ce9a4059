//! Run configuration, read from a TOML document.
//!
//! ```toml
//! scenario = "baseline"
//! mode = "steady"
//! seed = 1
//!
//! [overrides]
//! n = 25
//! coupling = 0.5
//!
//! [solver]
//! method = "auto"
//! residual_tolerance = 1e-10
//!
//! [evolve]
//! times = [1.0, 10.0, 20.0, 30.0]
//! dt = 0.01
//!
//! [sweep]
//! kind = "crossover"
//! sizes = [3, 4, 5]
//! gamma = 0.5
//!
//! [output]
//! dir = "out"
//! format = "both"
//! ```

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qchain::scenarios::{Overrides, ScenarioName};
use qchain::steady::RESIDUAL_TOLERANCE;
use qchain::SteadyMethod;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Steady,
    Evolve,
    Sweep,
    Spectrum,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Steady => "steady",
            Mode::Evolve => "evolve",
            Mode::Sweep => "sweep",
            Mode::Spectrum => "spectrum",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(&self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(&self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

fn default_tolerance() -> f64 {
    RESIDUAL_TOLERANCE
}

fn default_dt() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub method: SteadyMethod,
    /// Largest accepted stationary residual relative to `‖D‖_F`.
    #[serde(default = "default_tolerance")]
    pub residual_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SteadyMethod::Auto,
            residual_tolerance: RESIDUAL_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub times: Vec<f64>,
    /// RK4 step, used when no closed form applies.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Initial thermal occupation on every site; vacuum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_nbar: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Dephasing attached to the first `k` sites, `k = 0..n`, per size.
    Crossover { sizes: Vec<usize>, gamma: f64 },
    /// Steady observables as a function of chain length.
    Size { sizes: Vec<usize> },
    /// Steady profiles over seeds of the random couplings.
    Seeds { seeds: Vec<u64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// The seed in effect, folding the top-level key into the overrides.
    pub fn overrides_with_seed(&self) -> Overrides {
        let mut o = self.overrides.clone();
        if self.seed.is_some() {
            o.seed = self.seed;
        }
        o
    }

    /// Checks that do not need the physics: mode consistency and the
    /// sections each mode requires.
    pub fn check_schema(&self, mode: Mode) -> CliResult<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(CliError::Config(format!(
                    "config declares mode `{}` but the `{}` command was run",
                    m.as_str(),
                    mode.as_str()
                )));
            }
        }
        if self.seed.is_some() && self.overrides.seed.is_some() && self.seed != self.overrides.seed {
            return Err(CliError::Config("`seed` and `overrides.seed` disagree".into()));
        }
        if !(self.solver.residual_tolerance.is_finite() && self.solver.residual_tolerance > 0.0) {
            return Err(CliError::Config("solver.residual_tolerance must be positive".into()));
        }
        match mode {
            Mode::Evolve => {
                let ev = self
                    .evolve
                    .as_ref()
                    .ok_or_else(|| CliError::Config("evolve mode needs an [evolve] section".into()))?;
                if ev.times.is_empty() {
                    return Err(CliError::Config("evolve.times must not be empty".into()));
                }
                if !(ev.dt.is_finite() && ev.dt > 0.0) {
                    return Err(CliError::Config("evolve.dt must be positive".into()));
                }
                if let Some(v) = ev.initial_nbar {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(CliError::Config("evolve.initial_nbar must be non-negative".into()));
                    }
                }
            }
            Mode::Sweep => {
                let sw = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| CliError::Config("sweep mode needs a [sweep] section".into()))?;
                let empty = match sw {
                    SweepConfig::Crossover { sizes, .. } | SweepConfig::Size { sizes } => sizes.is_empty(),
                    SweepConfig::Seeds { seeds } => seeds.is_empty(),
                };
                if empty {
                    return Err(CliError::Config("sweep axis must not be empty".into()));
                }
                if matches!(sw, SweepConfig::Crossover { .. }) && self.scenario != ScenarioName::CaseIV {
                    return Err(CliError::Config("crossover sweeps run on the caseIV scenario".into()));
                }
            }
            Mode::Steady | Mode::Spectrum => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("scenario = \"baseline\"\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = RunConfig::parse("scenario = \"baseline\"\n[overrides]\nzetta = 0.1\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn minimal_config_defaults() {
        let c = RunConfig::parse("scenario = \"caseIII\"").unwrap();
        assert_eq!(c.scenario, ScenarioName::CaseIII);
        assert_eq!(c.solver, SolverConfig::default());
        assert!(c.check_schema(Mode::Steady).is_ok());
        assert!(c.check_schema(Mode::Evolve).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
scenario = "caseIV"
mode = "sweep"
seed = 3

[overrides]
n = 6
gammas = [0.5, 0.25, 0.0, 0.0, 0.125, 1e-3]

[sweep]
kind = "crossover"
sizes = [3, 4]
gamma = 0.5
"#;
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn mode_mismatch_is_a_config_error() {
        let c = RunConfig::parse("scenario = \"baseline\"\nmode = \"evolve\"").unwrap();
        assert_eq!(c.check_schema(Mode::Steady).unwrap_err().exit_code(), 2);
    }
}
