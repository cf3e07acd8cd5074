//! TOML experiment files for `extend --config`. Flags given on the command
//! line take precedence over the file.
//!
//! ```toml
//! version = 1
//! alphas = ["root(2, 2)"]
//! k = 1
//! samples = 5
//! seed = 7
//! max_norm = 60
//! ```

use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    /// Used to enumerate the base chain when no chain file is given.
    #[serde(default)]
    pub alphas: Vec<String>,
    pub k: Option<usize>,
    #[serde(default)]
    pub betas: Vec<String>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub max_norm: Option<u64>,
    pub precision_cap: Option<u32>,
    pub budget: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("unsupported config version {0} (expected {CONFIG_VERSION})")]
    Version(u32),
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        if cfg.version != CONFIG_VERSION {
            return Err(ConfigError::Version(cfg.version));
        }
        Ok(cfg)
    }
}
