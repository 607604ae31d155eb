use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("operator image vanished at stage {stage} (underflow)")]
    Underflow { stage: usize },

    #[error("partition bracket is not positive: {value:.6e}")]
    NonPositivePartition { value: f64 },

    #[error("invalid insertion: {0}")]
    InvalidInsertion(String),

    #[error("dimension mismatch at stage {stage}: expected {expected}, got {got}")]
    Dimension {
        stage: usize,
        expected: usize,
        got: usize,
    },

    #[error("chain has no operators but {0} were required")]
    EmptyChain(&'static str),

    #[error("missing sub-marginal for sites {0:?}")]
    MissingSubMarginal(Vec<usize>),

    #[error("marginal table over {sites} sites with {cells} cells exceeds the desk-scale cap")]
    TableTooLarge { sites: usize, cells: usize },

    #[error("marginal is not normalizable: integral {0:.6e}")]
    NotNormalizable(f64),

    #[error("invalid parameter {name} = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("chain build failed: {0}")]
    BuildFailed(String),
}
