//! Pre-flight diagnostics. Never fails: every problem becomes a diagnostic.

use std::path::Path;

use qchain::scenarios::preset;
use qchain::steady::stability_check;
use serde::Serialize;

use crate::config::{Mode, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Io,
    Schema,
    Physics,
    Stability,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl Diagnostic {
    fn error(kind: Kind, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            kind,
            field: None,
            message: message.into(),
        }
    }
}

pub fn validate_file(path: &Path, mode: Option<Mode>) -> Vec<Diagnostic> {
    match std::fs::read_to_string(path) {
        Ok(text) => validate_text(&text, mode),
        Err(e) => vec![Diagnostic::error(Kind::Io, format!("{}: {e}", path.display()))],
    }
}

pub fn validate_text(text: &str, mode: Option<Mode>) -> Vec<Diagnostic> {
    match RunConfig::parse(text) {
        Ok(cfg) => validate(&cfg, mode),
        Err(e) => vec![Diagnostic::error(Kind::Schema, e.to_string())],
    }
}

/// Schema, physics and stability checks without solving anything. The
/// mode defaults to the config's own, then to `steady`.
pub fn validate(cfg: &RunConfig, mode: Option<Mode>) -> Vec<Diagnostic> {
    let mode = mode.or(cfg.mode).unwrap_or(Mode::Steady);
    let mut out = Vec::new();
    if let Err(e) = cfg.check_schema(mode) {
        out.push(Diagnostic::error(Kind::Schema, e.to_string()));
    }
    let p = match preset(cfg.scenario, &cfg.overrides_with_seed()) {
        Ok(p) => p,
        Err(e) => {
            let field = match &e {
                qchain::Error::InvalidParameter { field, .. } => Some(field.clone()),
                _ => None,
            };
            out.push(Diagnostic {
                field,
                ..Diagnostic::error(Kind::Physics, e.to_string())
            });
            return out;
        }
    };
    let sys = match p.system() {
        Ok(s) => s,
        Err(e) => {
            out.push(Diagnostic::error(Kind::Physics, e.to_string()));
            return out;
        }
    };
    if matches!(mode, Mode::Steady | Mode::Sweep) {
        let g = &sys.generators;
        for (what, m) in [
            ("drift", g.gamma.clone()),
            ("dephasing-dressed drift", g.dressed_drift()),
        ] {
            match stability_check(&m) {
                Ok(r) if !r.stable => out.push(Diagnostic {
                    severity: Severity::Warning,
                    kind: Kind::Stability,
                    field: None,
                    message: format!(
                        "no steady state exists: {what} has an eigenvalue with real part {:e} (not decaying)",
                        -r.spectral_gap
                    ),
                }),
                Ok(_) => {}
                Err(e) => out.push(Diagnostic::error(Kind::Stability, e.to_string())),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_rate_names_the_field() {
        let text = "scenario = \"baseline\"\n[overrides]\nn = 3\nzetas = [0.1, -0.1, 0.1]\n";
        let d = validate_text(text, None);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].kind, Kind::Physics);
        assert_eq!(d[0].field.as_deref(), Some("thermal[2].rate"));
    }

    #[test]
    fn all_diffusive_steady_warns() {
        let d = validate_text("scenario = \"caseII\"\nmode = \"steady\"\n", None);
        assert!(!d.is_empty());
        assert!(d.iter().all(|x| x.severity == Severity::Warning));
        assert!(d[0].message.contains("no steady state exists"), "{d:?}");
        let d = validate_text("scenario = \"caseII\"\n[evolve]\ntimes = [1.0]\n", Some(Mode::Evolve));
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn valid_baseline_is_clean() {
        assert!(validate_text("scenario = \"baseline\"\n", None).is_empty());
    }

    #[test]
    fn schema_errors_are_reported() {
        let d = validate_text("scenario = \"nope\"\n", None);
        assert_eq!(d[0].kind, Kind::Schema);
    }
}
