//! Experiment files: one TOML document per run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tiltlab::verify::{CheckConfig, ConfinementConfig};
use tiltlab::{Schedule, TiltedEnsembleSpec};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand the file was written for; checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Seeds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Output>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<TiltedEnsembleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub airy: Option<AiryBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confinement: Option<ConfinementConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub master: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
    /// Any of "csv" and "json"; both when empty.
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Sweep schedule shared by all replicas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleBlock {
    pub sweeps: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default = "one")]
    pub thin: u64,
    #[serde(default = "one")]
    pub replicas: u64,
}

fn default_burn_in() -> u64 {
    tiltlab::sampler::DEFAULT_BURN_IN
}

fn one() -> u64 {
    1
}

impl ScheduleBlock {
    pub fn schedule(&self) -> Schedule {
        Schedule {
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            thin: self.thin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AiryBlock {
    pub a: f64,
    #[serde(rename = "L")]
    pub len: usize,
}

impl RunConfig {
    /// Reads a TOML experiment file, or the `config` member of a JSON
    /// sidecar written by `sample`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct Sidecar {
                config: RunConfig,
            }
            let s: Sidecar = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            return Ok(s.config);
        }
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn master_seed(&self) -> Result<u64> {
        match self.seeds {
            Some(s) => Ok(s.master),
            None => bail!("no master seed: set [seeds] master in the config or pass --seed"),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.as_ref().map_or(true, |o| o.formats.is_empty() || o.formats.contains(&f))
    }

    /// Everything that determines the results, serialized; the output
    /// directory is left out.
    pub fn normalized(&self) -> Result<String> {
        let mut c = self.clone();
        if let Some(o) = c.output.as_mut() {
            o.dir = None;
        }
        c.to_toml()
    }

    /// First 16 hex digits of the SHA-256 of [`Self::normalized`].
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.normalized()?.as_bytes());
        Ok(hex::encode(&digest[..8]))
    }

    pub fn validate_for(&self, command: &str) -> Result<()> {
        if let Some(c) = &self.command {
            if c != command {
                bail!("config was written for '{c}', not '{command}'");
            }
        }
        self.master_seed()?;
        if let Some(s) = &self.schedule {
            if s.replicas == 0 {
                bail!("replicas must be at least 1");
            }
            s.schedule().validate()?;
        }
        if let Some(spec) = &self.spec {
            spec.validate()?;
        }
        Ok(())
    }
}
