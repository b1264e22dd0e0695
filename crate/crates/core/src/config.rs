//! Run configuration: JSON on disk, one validated plan shared by every
//! command.
//!
//! A config pins the angle regime, the level range, the weight and gauge
//! names, Monte-Carlo budgets, and the seed. Name registries live here so
//! an unknown weight or gauge fails at load time, before any geometry runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::{AngleSequenceSpec, Regime};
use crate::construct::{phi_from_conjugate, phi_identity, phi_shifted_exp, PhiSpec};
use crate::orlicz::OrliczFunction;
use crate::tolerances::CONSTRUCTION_K_CAP;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("level cap exceeded: k_max {k_max} > {cap}")]
    Capacity { k_max: usize, cap: usize },
}

/// The three built-in parameter sets; anything else comes from a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinRegime {
    Lacunary,
    Superlacunary,
    Power,
}

fn default_k_min() -> usize {
    1
}

fn default_k_max() -> usize {
    8
}

fn default_phis() -> Vec<String> {
    vec!["identity".into(), "conjugate".into()]
}

fn default_samples() -> u64 {
    20_000
}

fn default_seed() -> u64 {
    42
}

fn default_trials() -> usize {
    200
}

fn default_grid() -> usize {
    2048
}

fn one() -> f64 {
    1.0
}

fn default_extension() -> f64 {
    3.0
}

/// A full run plan. Unknown fields are rejected so typos surface as parse
/// errors rather than silently running defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub regime: Regime,
    /// Angle count fed to the generator.
    pub count: usize,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Depth-weight names for the overlap bounds.
    #[serde(default = "default_phis")]
    pub phis: Vec<String>,
    /// Gauge for superlevel integrals; None picks the regime default.
    #[serde(default)]
    pub phi: Option<String>,
    /// Candidate control gauges for the divergence series.
    #[serde(default)]
    pub psis: Vec<String>,
    /// Scale factor T inside the control gauge.
    #[serde(default = "one")]
    pub t_factor: f64,
    /// Global multiplier on every tolerance; 0 demands exact margins.
    #[serde(default = "one")]
    pub tolerance_factor: f64,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Weak-type probe trial count.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Weak-type probe raster resolution.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Length multiplier for the extension-ratio scan.
    #[serde(default = "default_extension")]
    pub extension: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn builtin(regime: BuiltinRegime) -> Self {
        let (regime, count) = match regime {
            BuiltinRegime::Lacunary => (
                Regime::Lacunary {
                    lambda: 0.25,
                    mu: 0.35,
                    m0: 0.25,
                    ratios: None,
                },
                24,
            ),
            BuiltinRegime::Superlacunary => (
                Regime::Superlacunary {
                    d: 2,
                    lambda: 0.9,
                    mu: 0.95,
                    m0: 0.9,
                    ratios: None,
                },
                12,
            ),
            BuiltinRegime::Power => (
                Regime::Power {
                    d: 0.5,
                    a: 0.02,
                    b: 0.02,
                    coeffs: None,
                },
                24,
            ),
        };
        RunConfig {
            regime,
            count,
            k_min: default_k_min(),
            k_max: default_k_max(),
            phis: default_phis(),
            phi: None,
            psis: Vec::new(),
            t_factor: 1.0,
            tolerance_factor: 1.0,
            samples: default_samples(),
            seed: default_seed(),
            trials: default_trials(),
            grid: default_grid(),
            extension: default_extension(),
            out: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    /// An empty range (k_min > k_max) is legal and yields header-only
    /// series.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k_max > CONSTRUCTION_K_CAP {
            return Err(ConfigError::Capacity {
                k_max: self.k_max,
                cap: CONSTRUCTION_K_CAP,
            });
        }
        if self.k_min == 0 && self.k_min <= self.k_max {
            return Err(ConfigError::Invalid("k_min must be at least 1".into()));
        }
        AngleSequenceSpec::new(self.regime.clone(), self.count)
            .map_err(|e| ConfigError::Invalid(format!("angle spec: {e}")))?;
        if self.phis.is_empty() {
            return Err(ConfigError::Invalid("phis must be nonempty".into()));
        }
        for name in &self.phis {
            if !matches!(name.as_str(), "identity" | "shifted-exp" | "conjugate") {
                return Err(ConfigError::Invalid(format!("unknown weight name `{name}`")));
            }
        }
        let gauge = self.gauge()?;
        for name in &self.psis {
            parse_gauge(name)?;
        }
        if !(self.t_factor > 0.0 && self.t_factor.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "t_factor must be positive and finite, got {}",
                self.t_factor
            )));
        }
        if !(self.tolerance_factor >= 0.0 && self.tolerance_factor.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "tolerance_factor must be finite and ≥ 0, got {}",
                self.tolerance_factor
            )));
        }
        if self.samples == 0 {
            return Err(ConfigError::Invalid("samples must be positive".into()));
        }
        if self.trials < 100 {
            return Err(ConfigError::Invalid(format!(
                "trials must be at least 100, got {}",
                self.trials
            )));
        }
        if !(64..=8192).contains(&self.grid) {
            return Err(ConfigError::Invalid(format!(
                "grid must be in [64, 8192], got {}",
                self.grid
            )));
        }
        if !(self.extension > 1.0 && self.extension.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "extension must exceed 1, got {}",
                self.extension
            )));
        }
        // The conjugate weight only exists where the gauge outgrows lines.
        if self.phis.iter().any(|n| n == "conjugate") {
            phi_from_conjugate(&gauge, 2)
                .map_err(|e| ConfigError::Invalid(format!("conjugate weight: {e}")))?;
        }
        Ok(())
    }

    /// Gauge for superlevel integrals: the configured name, else the
    /// regime's default.
    pub fn gauge(&self) -> Result<OrliczFunction, ConfigError> {
        match &self.phi {
            Some(name) => parse_gauge(name),
            None => parse_gauge(&default_gauge_name(&self.regime)),
        }
    }

    /// Control gauges for the divergence series; defaults to the gauge
    /// itself.
    pub fn controls(&self) -> Result<Vec<(String, OrliczFunction)>, ConfigError> {
        if self.psis.is_empty() {
            let name = match &self.phi {
                Some(name) => name.clone(),
                None => default_gauge_name(&self.regime),
            };
            return Ok(vec![(name.clone(), parse_gauge(&name)?)]);
        }
        self.psis
            .iter()
            .map(|name| Ok((name.clone(), parse_gauge(name)?)))
            .collect()
    }

    /// Depth weights resolved against the gauge, in config order.
    pub fn weights(&self, max_m: usize) -> Result<Vec<PhiSpec>, ConfigError> {
        let gauge = self.gauge()?;
        self.phis
            .iter()
            .map(|name| weight_from_name(name, max_m, &gauge))
            .collect()
    }

    pub fn angle_spec(&self) -> Result<AngleSequenceSpec, ConfigError> {
        AngleSequenceSpec::new(self.regime.clone(), self.count)
            .map_err(|e| ConfigError::Invalid(format!("angle spec: {e}")))
    }

    pub fn regime_name(&self) -> &'static str {
        match self.regime {
            Regime::Lacunary { .. } => "lacunary",
            Regime::Superlacunary { .. } => "superlacunary",
            Regime::Power { .. } => "power",
        }
    }

    /// Output directory: CLI flag beats config, config beats `out/`.
    pub fn out_dir(&self, cli_out: Option<&Path>) -> PathBuf {
        cli_out
            .map(Path::to_path_buf)
            .or_else(|| self.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Gauge names: `loglog`, `phi-beta:<β>`, `power:<p>` or
/// `power:<p>:<coeff>`.
pub fn parse_gauge(name: &str) -> Result<OrliczFunction, ConfigError> {
    let bad = |msg: String| ConfigError::Invalid(msg);
    if name == "loglog" {
        return Ok(OrliczFunction::loglog());
    }
    if let Some(rest) = name.strip_prefix("phi-beta:") {
        let beta: f64 = rest
            .parse()
            .map_err(|_| bad(format!("bad β in gauge `{name}`")))?;
        return OrliczFunction::phi_beta(beta).map_err(|e| bad(format!("gauge `{name}`: {e}")));
    }
    if let Some(rest) = name.strip_prefix("power:") {
        let mut parts = rest.splitn(2, ':');
        let p: f64 = parts
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|_| bad(format!("bad exponent in gauge `{name}`")))?;
        let coeff: f64 = match parts.next() {
            Some(c) => c
                .parse()
                .map_err(|_| bad(format!("bad coefficient in gauge `{name}`")))?,
            None => 1.0,
        };
        return OrliczFunction::power(p, coeff).map_err(|e| bad(format!("gauge `{name}`: {e}")));
    }
    Err(bad(format!("unknown gauge name `{name}`")))
}

/// Regime defaults: almost-linear growth keeps the β = 1 gauge, square
/// lacunarity earns the log-log gauge, and the power regime takes β = 1/d.
pub fn default_gauge_name(regime: &Regime) -> String {
    match regime {
        Regime::Lacunary { .. } => "phi-beta:1".into(),
        Regime::Superlacunary { .. } => "loglog".into(),
        Regime::Power { d, .. } => format!("phi-beta:{}", 1.0 / d),
    }
}

pub fn weight_from_name(
    name: &str,
    max_m: usize,
    gauge: &OrliczFunction,
) -> Result<PhiSpec, ConfigError> {
    match name {
        "identity" => Ok(phi_identity(max_m)),
        "shifted-exp" => Ok(phi_shifted_exp(max_m)),
        "conjugate" => phi_from_conjugate(gauge, max_m)
            .map_err(|e| ConfigError::Invalid(format!("conjugate weight: {e}"))),
        other => Err(ConfigError::Invalid(format!("unknown weight name `{other}`"))),
    }
}
