use thiserror::Error;

/// Errors raised by the cone and operator machinery.
#[derive(Debug, Error)]
pub enum ConeError {
    /// A vector failed the membership test of the cone it was claimed to lie in.
    #[error("vector not in cone `{cone}`: violates `{condition}`")]
    NotInCone { cone: String, condition: String },

    /// Mismatched vector/matrix dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A strictly positive interior point was required.
    #[error("{context}: entry {index} is not strictly positive")]
    NotInterior { context: String, index: usize },

    /// A finite projective diameter was required.
    #[error("projective diameter is infinite: {witness}")]
    InfiniteDiameter { witness: String },

    /// A contraction certificate failed at a specific stage of a chain.
    #[error("contraction certificate failed at stage {stage}: {detail}")]
    CertificateFailure { stage: usize, detail: String },

    /// No comparable pair could be sampled.
    #[error("no comparable pair found in {attempts} attempts")]
    Indeterminate { attempts: usize },

    /// Dominant eigenpair missing or degenerate.
    #[error("spectral construction refused: {0}")]
    SpectralRefusal(String),

    /// Parameter outside its admissible range.
    #[error("invalid parameter {name} = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
}
