//! Config schema and error-to-exit-code mapping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown command `{0}`")]
    UnknownCommand(String),

    #[error("cannot read config: {0}")]
    UnreadableConfig(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("certification failure: {0}")]
    Certification(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<jellium::JelliumError> for CliError {
    fn from(e: jellium::JelliumError) -> Self {
        match e {
            jellium::JelliumError::CalibrationFailed { .. }
            | jellium::JelliumError::InvarianceFailed { .. }
            | jellium::JelliumError::CertificationFailed(_) => {
                CliError::Certification(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<transfer_chain::ChainError> for CliError {
    fn from(e: transfer_chain::ChainError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<cone_core::ConeError> for CliError {
    fn from(e: cone_core::ConeError) -> Self {
        match e {
            cone_core::ConeError::InfiniteDiameter { .. }
            | cone_core::ConeError::CertificateFailure { .. } => {
                CliError::Certification(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<sampling_clt::SamplingError> for CliError {
    fn from(e: sampling_clt::SamplingError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    pub model: ModelConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub params: CommandParams,
}

impl Config {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> std::path::PathBuf {
        std::path::PathBuf::from(self.out.clone().unwrap_or_else(|| ".".into()))
    }

    pub fn format(&self) -> Result<OutputFormat, CliError> {
        match self.format.as_deref() {
            None | Some("csv") => Ok(OutputFormat::Csv),
            Some("json") => Ok(OutputFormat::Json),
            Some(other) => Err(CliError::Validation(format!(
                "unsupported format `{other}` (csv|json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    MatrixChain {
        /// Explicit kernel entries (row major), or
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        /// the two-state family [[beta, eps], [eps, 1]].
        #[serde(default)]
        two_state: Option<TwoState>,
        #[serde(default = "default_n_ops")]
        n_ops: usize,
    },
    Jellium(jellium::JelliumConfig),
}

fn default_n_ops() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TwoState {
    pub beta: f64,
    pub epsilon: f64,
}

/// Per-command knobs; unused fields are simply ignored by other commands.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct CommandParams {
    /// free-energy sweep
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub beta_steps: Option<usize>,
    /// derivatives
    pub k_max: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub beta0: Option<f64>,
    /// correlations / truncated
    pub gaps: Option<Vec<usize>>,
    pub params_file: Option<String>,
    /// clt
    pub n_samples: Option<usize>,
    pub n_seeds: Option<usize>,
    /// contraction / certification sampling
    pub pairs: Option<usize>,
}
