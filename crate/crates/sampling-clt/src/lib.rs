//! Exact sequential sampling of the particle process defined by a chain,
//! and the central-limit-theorem harness built on tilted operators.
//!
//! The chain's measure factorizes over its slots; backward messages (partial
//! products toward the right boundary) turn it into a sequence of explicit
//! discrete conditionals, sampled by inverse CDF. Everything is exact with
//! respect to the discretized measure — sampled positions are grid nodes —
//! so sampler output can be validated against the chain's own marginals to
//! statistical precision.

pub mod clt;
pub mod error;
pub mod ks;
pub mod messages;
pub mod sampler;

pub use clt::{clt_report, tilted_chain, CltOptions, CltReport, ObservableSpec};
pub use error::SamplingError;
pub use ks::{ks_statistic, normal_cdf};
pub use messages::backward_messages;
pub use sampler::{sample_positions, SampleBatch};
