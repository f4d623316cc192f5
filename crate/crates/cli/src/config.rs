use lane_emden_spectra::green::OracleSpec;
use lane_emden_spectra::radial_lab::sweep::DEFAULT_EPSILONS;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

/// Largest ε the radial solver accepts.
pub const EPS_MAX: f64 = 0.3;
/// Smallest mesh counts the radial solver resolves reliably.
pub const MIN_MESH_COUNT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    GreenCheck,
    Reduce,
    RadialLab,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::GreenCheck => "green-check",
            Command::Reduce => "reduce",
            Command::RadialLab => "radial-lab",
            Command::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pass limits of the checks each subcommand runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Quadrature against closed form, every integral constant.
    pub dual: f64,
    /// Relative residual of the Robin boundary identities.
    pub robin: f64,
    /// Sphere quadrature order of the Robin check.
    pub robin_order: usize,
    /// Analytic Green derivatives against finite differences.
    pub derivatives: f64,
    /// Relative asymmetry of `Q` and path difference of `A2`.
    pub matrix_symmetry: f64,
    /// `M2`'s smallest eigenvalue may dip to `-m2_floor·‖M2‖_F`.
    pub m2_floor: f64,
    pub first_band_intercept: f64,
    pub first_band_slope: f64,
    pub middle_band: f64,
    pub last_band_slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dual: 1e-8,
            robin: 1e-5,
            robin_order: 64,
            derivatives: 1e-6,
            matrix_symmetry: 1e-9,
            m2_floor: 1e-9,
            first_band_intercept: 0.02,
            first_band_slope: 0.10,
            middle_band: 0.20,
            last_band_slope: 0.10,
        }
    }
}

fn default_epsilons() -> Vec<f64> {
    DEFAULT_EPSILONS.to_vec()
}

fn default_count() -> usize {
    400
}

fn default_levels() -> usize {
    3
}

/// One run of the tool. Every key except `subcommand` and `n` is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Command,
    pub n: usize,
    #[serde(default)]
    pub oracle: OracleSpec,
    /// Number of bubbles; implied by `lambdas` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_count")]
    pub core_count: usize,
    #[serde(default = "default_count")]
    pub outer_count: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    /// Defaults for everything but the subcommand and dimension.
    pub fn new(subcommand: Command, n: usize) -> Self {
        RunConfig {
            subcommand,
            n,
            oracle: OracleSpec::UnitBall {},
            m: None,
            lambdas: Vec::new(),
            points: Vec::new(),
            epsilons: default_epsilons(),
            core_count: default_count(),
            outer_count: default_count(),
            levels: default_levels(),
            out: None,
            tolerances: Tolerances::default(),
        }
    }

    /// Checks every value; the first violation is reported by its key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.n;
        if !(3..=5).contains(&n) {
            return Err(ConfigError::key("n", format!("must be 3, 4 or 5, got {n}")));
        }
        if let OracleSpec::ScaledBall { center, radius } = &self.oracle {
            if center.len() != n {
                return Err(ConfigError::key(
                    "oracle.center",
                    format!("expected {n} coordinates, got {}", center.len()),
                ));
            }
            if let Some(k) = center.iter().position(|c| !c.is_finite()) {
                return Err(ConfigError::key(
                    format!("oracle.center[{k}]"),
                    "must be finite",
                ));
            }
            if !(*radius > 0.0 && radius.is_finite()) {
                return Err(ConfigError::key(
                    "oracle.radius",
                    format!("must be positive and finite, got {radius}"),
                ));
            }
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(ConfigError::key(
                    format!("lambdas[{i}]"),
                    format!("must be positive and finite, got {l}"),
                ));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            if p.len() != n {
                return Err(ConfigError::key(
                    format!("points[{i}]"),
                    format!("expected {n} coordinates, got {}", p.len()),
                ));
            }
            if let Some(k) = p.iter().position(|c| !c.is_finite()) {
                return Err(ConfigError::key(
                    format!("points[{i}][{k}]"),
                    "must be finite",
                ));
            }
            let (center, radius) = match &self.oracle {
                OracleSpec::UnitBall {} => (vec![0.0; n], 1.0),
                OracleSpec::ScaledBall { center, radius } => (center.clone(), *radius),
            };
            let r = p
                .iter()
                .zip(&center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if r >= radius {
                return Err(ConfigError::key(
                    format!("points[{i}]"),
                    format!("lies outside the domain, |x - center| = {r} >= {radius}"),
                ));
            }
        }
        if self.subcommand == Command::Reduce && self.lambdas.len() != self.points.len() {
            return Err(ConfigError::key(
                "lambdas",
                format!(
                    "has {} entries but points has {}",
                    self.lambdas.len(),
                    self.points.len()
                ),
            ));
        }
        if let Some(m) = self.m {
            if m != self.lambdas.len() {
                return Err(ConfigError::key(
                    "m",
                    format!("is {m} but lambdas has {} entries", self.lambdas.len()),
                ));
            }
        }
        if self.epsilons.is_empty() {
            return Err(ConfigError::key("epsilons", "must not be empty"));
        }
        for (i, &e) in self.epsilons.iter().enumerate() {
            if !(e > 0.0 && e <= EPS_MAX) {
                return Err(ConfigError::key(
                    format!("epsilons[{i}]"),
                    format!("must lie in (0, {EPS_MAX}], got {e}"),
                ));
            }
            if i > 0 && !(e < self.epsilons[i - 1]) {
                return Err(ConfigError::key(
                    format!("epsilons[{i}]"),
                    "must be smaller than the previous entry",
                ));
            }
        }
        for (key, count) in [
            ("core_count", self.core_count),
            ("outer_count", self.outer_count),
        ] {
            if count < MIN_MESH_COUNT {
                return Err(ConfigError::key(
                    key,
                    format!("must be at least {MIN_MESH_COUNT}, got {count}"),
                ));
            }
        }
        if !(1..=4).contains(&self.levels) {
            return Err(ConfigError::key(
                "levels",
                format!("must lie in 1..=4, got {}", self.levels),
            ));
        }
        self.tolerances.validate()
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), ConfigError> {
        let t = self;
        for (key, v) in [
            ("dual", t.dual),
            ("robin", t.robin),
            ("derivatives", t.derivatives),
            ("matrix_symmetry", t.matrix_symmetry),
            ("m2_floor", t.m2_floor),
            ("first_band_intercept", t.first_band_intercept),
            ("first_band_slope", t.first_band_slope),
            ("middle_band", t.middle_band),
            ("last_band_slope", t.last_band_slope),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::key(
                    format!("tolerances.{key}"),
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        if t.robin_order < 4 {
            return Err(ConfigError::key(
                "tolerances.robin_order",
                format!("must be at least 4, got {}", t.robin_order),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    /// Malformed JSON, wrong types or unknown keys, as reported by the parser.
    #[error("{0}")]
    Schema(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    fn key(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }
}

/// Parses and validates a JSON config, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical JSON of a config; [`parse_config`] reads it back unchanged.
pub fn emit_config(cfg: &RunConfig) -> String {
    crate::json::to_json(cfg).expect("configs always serialize")
}
