use thiserror::Error;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("degenerate conditional at site {site}: all probabilities vanish")]
    DegenerateConditional { site: usize },

    #[error("observable dimension mismatch at site {site}")]
    ObservableMismatch { site: usize },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error(transparent)]
    Chain(#[from] transfer_chain::ChainError),
}
