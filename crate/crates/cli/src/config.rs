//! Experiment configuration: JSON file, flag overrides and validation.

use std::path::Path;

use eventum_core::atom::AtomParams;
use eventum_core::qmat::c;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable consulted for the seed when no `--seed` flag is given.
pub const SEED_ENV: &str = "EVENTUM_SEED";

/// The shipped default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.json");

/// Amplitudes whose squared norm is off by more than this are rejected.
pub const NORMALIZATION_REJECT: f64 = 1e-3;
/// Amplitudes off by more than this (but within the reject bound) are
/// renormalized with a warning.
pub const NORMALIZATION_WARN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nu: f64,
    pub r: f64,
    /// `[re, im]`
    pub alpha: [f64; 2],
    /// `[re, im]`
    pub beta: [f64; 2],
    pub epsilon: f64,
    pub t_grid: Vec<f64>,
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub dt: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_json(DEFAULT_CONFIG).expect("shipped default config parses")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub nu: Option<f64>,
    pub r: Option<f64>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub beta_re: Option<f64>,
    pub beta_im: Option<f64>,
    pub epsilon: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub n_max: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
}

/// A validated configuration ready to drive the commands.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub params: AtomParams,
    pub t_grid: Vec<f64>,
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub dt: f64,
    /// Non-fatal adjustments made while validating.
    pub warnings: Vec<String>,
}

impl Experiment {
    /// Applies `overrides`, then the seed fallback `env_seed` (the value of
    /// [`SEED_ENV`], if set) when no seed flag is given, then validates.
    pub fn resolve(
        mut config: ExperimentConfig,
        overrides: &Overrides,
        env_seed: Option<&str>,
    ) -> Result<Self, CliError> {
        let o = overrides;
        macro_rules! apply {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = o.$field.clone() { $target = v; })*
            };
        }
        apply!(
            nu => config.nu,
            r => config.r,
            alpha_re => config.alpha[0],
            alpha_im => config.alpha[1],
            beta_re => config.beta[0],
            beta_im => config.beta[1],
            epsilon => config.epsilon,
            t_grid => config.t_grid,
            n_max => config.n_max,
            samples => config.samples,
            dt => config.dt,
        );
        config.seed = match (o.seed, env_seed) {
            (Some(seed), _) => seed,
            (None, Some(text)) => text.trim().parse().map_err(|_| {
                CliError::usage(format!(
                    "{SEED_ENV}={text:?} is not an unsigned 64-bit integer"
                ))
            })?,
            (None, None) => config.seed,
        };
        Self::validate(config)
    }

    pub fn validate(config: ExperimentConfig) -> Result<Self, CliError> {
        let mut warnings = Vec::new();
        let bad = |field: &str, why: String| CliError::usage(format!("invalid `{field}`: {why}"));
        if !(config.nu.is_finite() && config.nu > 0.0) {
            return Err(bad("nu", format!("must be positive, got {}", config.nu)));
        }
        if !(config.r.is_finite() && config.r > 0.0) {
            return Err(bad("r", format!("must be positive, got {}", config.r)));
        }
        if !config.epsilon.is_finite() {
            return Err(bad("epsilon", "must be finite".into()));
        }
        if !(config.dt.is_finite() && config.dt > 0.0) {
            return Err(bad("dt", format!("must be positive, got {}", config.dt)));
        }
        if config.samples == 0 {
            return Err(bad("samples", "must be at least 1".into()));
        }
        if config.t_grid.is_empty() {
            return Err(bad("t_grid", "must not be empty".into()));
        }
        if let Some(t) = config
            .t_grid
            .iter()
            .find(|t| !(0.0..=config.r).contains(*t))
        {
            return Err(bad("t_grid", format!("time {t} outside [0, {}]", config.r)));
        }
        if config.t_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(bad("t_grid", "times must be ascending".into()));
        }

        let alpha = c(config.alpha[0], config.alpha[1]);
        let beta = c(config.beta[0], config.beta[1]);
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(bad("alpha/beta", "amplitudes must be finite".into()));
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORMALIZATION_REJECT {
            return Err(bad(
                "alpha/beta",
                format!("|alpha|^2 + |beta|^2 = {norm} is not 1"),
            ));
        }
        if (norm - 1.0).abs() > NORMALIZATION_WARN {
            warnings.push(format!(
                "|alpha|^2 + |beta|^2 = {norm}; amplitudes renormalized"
            ));
        }
        let scale = norm.sqrt().recip();
        let params = AtomParams::new(
            config.nu,
            alpha * scale,
            beta * scale,
            config.epsilon,
            config.r,
        )
        .map_err(|e| CliError::usage(e.to_string()))?;

        Ok(Self {
            params,
            t_grid: config.t_grid,
            n_max: config.n_max,
            samples: config.samples,
            seed: config.seed,
            dt: config.dt,
            warnings,
        })
    }
}
