//! Solver settings: command-line flags override the config file, which
//! overrides the defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use hilbund::loewner::MveeConfig;

pub const DEFAULT_EPSILON: f64 = MveeConfig::DEFAULT_EPSILON;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CAP: u64 = hilbund::hyperspace::DEFAULT_ENUMERATION_CAP as u64;

/// Values that may come from a flag or from the config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub cap: Option<u64>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(vec![format!("config file: {e}")]))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(vec![format!("cannot read config {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    /// `self` wins over `fallback` field by field.
    pub fn or(self, fallback: Overrides) -> Overrides {
        Overrides {
            epsilon: self.epsilon.or(fallback.epsilon),
            tol: self.tol.or(fallback.tol),
            max_iter: self.max_iter.or(fallback.max_iter),
            seed: self.seed.or(fallback.seed),
            cap: self.cap.or(fallback.cap),
        }
    }
}

/// Resolved settings, echoed in every report. `tol` and `max_iter` stay
/// unset when the command's own default applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub epsilon: f64,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: u64,
    pub cap: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            epsilon: DEFAULT_EPSILON,
            tol: None,
            max_iter: None,
            seed: DEFAULT_SEED,
            cap: DEFAULT_CAP,
        }
    }
}

impl Settings {
    pub fn resolve(flags: Overrides, file: Option<Overrides>) -> Result<Settings, CliError> {
        let o = flags.or(file.unwrap_or_default());
        let d = Settings::default();
        let s = Settings {
            epsilon: o.epsilon.unwrap_or(d.epsilon),
            tol: o.tol,
            max_iter: o.max_iter,
            seed: o.seed.unwrap_or(d.seed),
            cap: o.cap.unwrap_or(d.cap),
        };
        let mut problems = Vec::new();
        if !(s.epsilon > 0.0 && s.epsilon <= 0.1) {
            problems.push(format!("epsilon {} must lie in (0, 0.1]", s.epsilon));
        }
        if let Some(t) = s.tol {
            if !(t > 0.0 && t.is_finite()) {
                problems.push(format!("tol {t} must be positive"));
            }
        }
        if s.max_iter == Some(0) {
            problems.push("max-iter must be positive".into());
        }
        if s.cap == 0 {
            problems.push("cap must be positive".into());
        }
        if problems.is_empty() {
            Ok(s)
        } else {
            Err(CliError::Validation(problems))
        }
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn mvee(&self, dim: usize) -> MveeConfig {
        let mut cfg = MveeConfig::for_dim(dim);
        cfg.epsilon = self.epsilon;
        cfg.oracle_tol = cfg.oracle_tol.min(self.epsilon);
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        cfg
    }
}
