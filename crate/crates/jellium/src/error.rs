use thiserror::Error;

#[derive(Debug, Error)]
pub enum JelliumError {
    #[error("neutrality violated: background charge {background:.12e} vs total particle charge {particles:.12e}")]
    NeutralityViolated { background: f64, particles: f64 },

    #[error("assumption {name} fails: {detail}")]
    AssumptionFailed { name: &'static str, detail: String },

    #[error("invalid parameter {name} = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("quadrature window too narrow for particle {particle}: tail weight {tail:.3e} exceeds {allowed:.3e}")]
    WindowTooNarrow {
        particle: usize,
        tail: f64,
        allowed: f64,
    },

    #[error("cone calibration failed at ratio index {k}: no admissible value (operator {op_index}, condition `{condition}`)")]
    CalibrationFailed {
        k: i64,
        op_index: usize,
        condition: String,
    },

    #[error("cone invariance verification failed for operator {op_index}: {condition}")]
    InvarianceFailed { op_index: usize, condition: String },

    #[error("contraction certification failed: {0}")]
    CertificationFailed(String),

    #[error("background table: {0}")]
    BackgroundTable(String),

    #[error(transparent)]
    Chain(#[from] transfer_chain::ChainError),
}
