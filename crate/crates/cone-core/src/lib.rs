//! Cones, the Hilbert projective metric and Birkhoff contraction machinery
//! for products of positive operators.
//!
//! The central objects are:
//!
//! * [`ConeOracle`] — a cone presented through its membership predicate and
//!   the two scalar oracles `alpha_max(x, y) = sup{α : αx ≤ y}` and
//!   `beta_min(x, y) = inf{β : y ≤ βx}`, which together define the Hilbert
//!   metric `d(x, y) = log(beta_min / alpha_max)`.
//! * [`PositiveOperator`] — a dense kernel matrix mapping grid functions to
//!   grid functions, order-preserving for a declared cone.
//! * [`RankOneOperator`] — the constructive rank-one compression `z ⊗ l` of a
//!   contracting operator, with a certified bound on the operator-cone
//!   distance to the original.
//!
//! An order-preserving operator with finite projective diameter Δ contracts
//! the Hilbert metric with ratio tanh(Δ/4); everything here is built around
//! measuring, certifying and exploiting that contraction.

pub mod cone;
pub mod error;
pub mod linalg;
pub mod metric;
pub mod nnls;
pub mod operator;
pub mod optim;
pub mod rank_one;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use cone::{ConeOracle, Membership, OrthantCone, LinearCone, ProjVector};
pub use error::ConeError;
pub use linalg::Matrix;
pub use metric::{
    contraction_bound, hilbert_distance, local_norm, measured_contraction,
    projective_diameter, refine_contraction_orthant, ContractionEstimate, DiameterEstimate,
};
pub use operator::{
    operator_distance_orthant, operator_distance_sampled, product_subadditivity_check,
    PositiveOperator, SubadditivityReport,
};
pub use rank_one::{rank_one_approx, rank_one_chain, RankOneOperator};
pub use rng::Rng;
pub use spectral::{spectral_gap_cone, SpectralGapCone, SpectralGapReport};
