//! Classical one-dimensional inhomogeneous charge gas in a neutralizing
//! background.
//!
//! The Gibbs measure of ordered particles with the 1D Coulomb kernel
//! factorizes over consecutive particles, so the partition function becomes
//! a boundary-contracted product of positive integral operators acting on
//! displacement profiles. This crate builds that machinery end to end:
//!
//! * equilibrium positions balancing the background charge around every
//!   particle, and the single-particle confining potentials,
//! * a panel-aligned Gauss-Legendre grid whose interval masses are exact
//!   weight sub-sums,
//! * the transfer kernels with row-exact treatment of the ordering cut,
//! * the bespoke invariant cone (monotone profiles with controlled interval
//!   mass ratios and a small negative tail allowance), calibrated
//!   numerically and certified contracting,
//! * the assembled [`transfer_chain::ChainModel`] with particle-indexed
//!   marginals.

pub mod background;
pub mod chain;
pub mod cone;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod potential;
pub mod system;

pub use background::Background;
pub use chain::{build_jellium_chain, JelliumChain};
pub use cone::{
    calibrate_cone_parameters, certify_contraction, CalibrationOptions, CertificationReport,
    JelliumCone, JelliumConeParams,
};
pub use config::{BackgroundConfig, ChargeSpec, GridConfig, JelliumConfig};
pub use equilibrium::{equilibrium_positions, EquilibriumLayout};
pub use error::JelliumError;
pub use grid::QuadratureGrid;
pub use kernel::{build_transfer_kernel, KernelBuild};
pub use potential::{potential_slope, potential_u, CumulativeMoments};
pub use system::{assumption_check, AssumptionReport, JelliumSystem};
