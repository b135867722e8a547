use std::fmt;

use serde::Serialize;

use hilbund::geometry::Ellipsoid;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input or settings: exit 2.
    Validation(Vec<String>),
    /// An iterative solver stopped early: exit 3, with the last iterate.
    Convergence { iterations: usize, gap: f64, best: Box<Ellipsoid> },
    /// Anything else (I/O, internal invariants): exit 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Convergence { .. } => 3,
            CliError::Failure(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Convergence { .. } => "non_convergence",
            CliError::Failure(_) => "failure",
        }
    }

    pub fn messages(&self) -> Vec<String> {
        match self {
            CliError::Validation(m) => m.clone(),
            CliError::Convergence { iterations, gap, .. } => {
                vec![format!("no convergence after {iterations} iterations (gap {gap:.3e})")]
            }
            CliError::Failure(m) => vec![m.clone()],
        }
    }

    /// Machine-readable diagnostics for stderr.
    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            error: self.kind(),
            exit_code: self.exit_code(),
            messages: self.messages(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub error: &'static str,
    pub exit_code: i32,
    pub messages: Vec<String>,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.messages().join("; "))
    }
}

impl std::error::Error for CliError {}

impl From<hilbund::Error> for CliError {
    fn from(e: hilbund::Error) -> Self {
        use hilbund::Error as E;
        match e {
            E::Convergence { iterations, gap, best } => CliError::Convergence { iterations, gap, best },
            E::Validation(m) => CliError::Validation(m),
            E::Internal(m) => CliError::Failure(m),
            other => CliError::Validation(vec![other.to_string()]),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(vec![format!("input: {e}")])
    }
}
