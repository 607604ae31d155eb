//! Inhomogeneous chains of positive operators.
//!
//! A [`ChainModel`] holds a left boundary functional `u`, a right boundary
//! vector `v` and an ordered operator list `T_0 … T_{M-1}`; the partition
//! function is the bracket `Z = (u, T_{M-1} ⋯ T_0 v)`, evaluated with
//! log-domain rescaling so arbitrarily long chains stay in range.
//!
//! Diagonal observables are inserted at *slots*: slot `p` sits between
//! `T_{p-1}` and `T_p` (slot 0 acts on `v`, slot `M` on `u`), and the k-point
//! correlation of diagonal insertions is the inserted bracket divided by `Z`.
//! On top of this sit gridded marginals, truncated (cumulant-like) marginals
//! over set partitions, the two-point decay band certified by the chain's
//! contraction data, free-energy derivative estimates and the Taylor
//! majorant that controls analyticity.

pub mod chain;
pub mod csv;
pub mod decay;
pub mod error;
pub mod free_energy;
pub mod majorant;
pub mod marginal;
pub mod truncated;

pub use chain::{apply_rescaled, ChainModel, Insertion, Scaled};
pub use csv::{decay_csv, derivative_csv};
pub use decay::{decay_band_check, DecayBandReport};
pub use error::ChainError;
pub use free_energy::{
    default_step, derivative_estimates, derivatives_of_scalar, free_energy, DerivativeEstimate,
    FreeEnergyConvention,
};
pub use majorant::analyticity_majorant;
pub use marginal::{ChainMessages, MarginalTable};
pub use truncated::{set_partitions, truncated_marginal, TruncatedMarginalTable};
