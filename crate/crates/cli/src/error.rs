use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    NoSteadyState(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::NoSteadyState(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Config(_) => "config",
            CliError::NoSteadyState(_) => "no_steady_state",
            CliError::Solver(_) => "solver",
        }
    }

    /// One-line JSON object for stderr.
    pub fn structured(&self) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<qchain::Error> for CliError {
    fn from(e: qchain::Error) -> Self {
        use qchain::Error as E;
        let msg = e.to_string();
        if e.is_no_steady_state() {
            return CliError::NoSteadyState(msg);
        }
        match e {
            E::InvalidSize { .. }
            | E::ShapeMismatch { .. }
            | E::NonFinite(_)
            | E::InvalidParameter { .. }
            | E::SiteOutOfRange { .. }
            | E::NotApplicable(_) => CliError::Config(msg),
            _ => CliError::Solver(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
