//! Structured-text configuration for systems and grids, shared with the CLI.

use serde::{Deserialize, Serialize};

use crate::background::Background;
use crate::error::JelliumError;
use crate::grid::GridSpec;
use crate::system::JelliumSystem;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JelliumConfig {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    pub charges: ChargeSpec,
    pub background: BackgroundConfig,
    #[serde(default)]
    pub grid: GridConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChargeSpec {
    Constant(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackgroundConfig {
    Constant {
        rho: f64,
    },
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Two-column CSV (t, rho), linearly interpolated.
    Tabulated {
        path: String,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default = "default_points")]
    pub points_per_interval: usize,
    #[serde(default = "default_tail_tol")]
    pub tail_tolerance: f64,
    #[serde(default = "default_subdivisions")]
    pub subdivisions: usize,
}

fn default_points() -> usize {
    6
}

fn default_tail_tol() -> f64 {
    1e-14
}

fn default_subdivisions() -> usize {
    1
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points_per_interval: default_points(),
            tail_tolerance: default_tail_tol(),
            subdivisions: default_subdivisions(),
        }
    }
}

impl JelliumConfig {
    /// Instantiates the system; tabulated backgrounds are read relative to
    /// `base_dir`.
    pub fn build_system(&self, base_dir: &std::path::Path) -> Result<JelliumSystem, JelliumError> {
        let charges = match &self.charges {
            ChargeSpec::Constant(q) => vec![*q; self.n],
            ChargeSpec::List(list) => {
                if list.len() != self.n {
                    return Err(JelliumError::InvalidParameter {
                        name: "charges",
                        value: list.len() as f64,
                        requirement: "charge list length must equal N",
                    });
                }
                list.clone()
            }
        };
        let background = match &self.background {
            BackgroundConfig::Constant { rho } => Background::Constant { rho: *rho },
            BackgroundConfig::Sinusoidal {
                mean,
                amplitude,
                wavenumber,
                phase,
            } => Background::Sinusoidal {
                mean: *mean,
                amplitude: *amplitude,
                wavenumber: *wavenumber,
                phase: *phase,
            },
            BackgroundConfig::Tabulated { path } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    JelliumError::BackgroundTable(format!("cannot read {}: {e}", full.display()))
                })?;
                Background::tabulated_from_csv(&text)?
            }
        };
        JelliumSystem::new(self.l, self.beta, charges, background)
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            points_per_panel: self.grid.points_per_interval,
            subdivisions: self.grid.subdivisions,
            tail_tolerance: self.grid.tail_tolerance,
            extra_breaks: Vec::new(),
        }
    }
}
