//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use nobind::field::{Cutoff, CutoffKind};
use nobind::oracle::OracleOptions;
use nobind::phase::DesignParams;
use nobind::spectra::MeshPolicy;
use nobind::{Potential, PotentialKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub dimension: u32,
    pub potential: PotentialSpec,
    pub cutoff: CutoffKind,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub design: DesignParams,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub mesh: MeshPolicy,
    #[serde(default)]
    pub oracle: OracleOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub m: f64,
    pub alpha: f64,
    pub eps: f64,
    /// Spectral parameter `E ≤ 0` for `count`.
    pub energy: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            m: 1.0,
            alpha: 0.2,
            eps: 0.1,
            energy: 0.0,
        }
    }
}

/// `count` equally spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub masses: Range,
    pub alphas: Range,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            masses: Range {
                start: 0.05,
                stop: 2.0,
                count: 40,
            },
            alphas: Range {
                start: 0.0,
                stop: 1.0,
                count: 41,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl RunConfig {
    pub fn default_config() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("shipped default config parses")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        positive("params.m", self.params.m)?;
        positive("params.eps", self.params.eps)?;
        if !self.params.alpha.is_finite() {
            return Err(CliError::Config("params.alpha must be finite".into()));
        }
        if !(self.params.energy <= 0.0) {
            return Err(CliError::Config(format!("params.energy must be <= 0, got {}", self.params.energy)));
        }
        for (name, r) in [("grid.masses", &self.grid.masses), ("grid.alphas", &self.grid.alphas)] {
            if r.count == 0 || !r.start.is_finite() || !r.stop.is_finite() {
                return Err(CliError::Config(format!("{name} needs finite bounds and count >= 1")));
            }
        }
        if self.grid.masses.values().iter().any(|m| !(*m > 0.0)) {
            return Err(CliError::Config("grid.masses must be positive".into()));
        }
        if self.output.workers == Some(0) {
            return Err(CliError::Config("output.workers must be >= 1".into()));
        }
        self.design.validate().map_err(|e| CliError::Config(format!("design: {e}")))?;
        self.mesh.validate().map_err(|e| CliError::Config(format!("mesh: {e}")))?;
        self.potential()?;
        self.cutoff()?;
        Ok(())
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        let p = Potential {
            kind: self.potential.kind.clone(),
            dimension: self.dimension,
            scale: self.potential.scale,
        };
        p.validate().map_err(|e| CliError::Config(format!("potential: {e}")))?;
        Ok(p)
    }

    pub fn cutoff(&self) -> Result<Cutoff, CliError> {
        Cutoff::new(self.cutoff.clone(), self.dimension).map_err(|e| CliError::Config(format!("cutoff: {e}")))
    }
}
