use alloc::string::String;

pub type Result<T, E = TansError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TansError {
    #[error("invalid parameter `{name}` = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("normal equations of dimension {dim} are singular even after diagonal loading")]
    SingularSystem { dim: usize },

    #[error("prediction error variance {value} lies outside [0, r(0) = {power}] beyond tolerance")]
    VarianceOutOfRange { value: f64, power: f64 },

    #[error("root condition violated: 1 - alpha^2 = {lhs} must be < rho / 2 = {rhs}")]
    RootCondition { lhs: f64, rhs: f64 },

    #[error("rate-distortion bounds require a symmetric chain, got p01 = {p01}, p10 = {p10}")]
    AsymmetricChain { p01: f64, p10: f64 },

    #[error("increment {increment} outside [1, {t_up}]")]
    IncrementOutOfRange { increment: usize, t_up: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("Hamming distortion requires a binary signal, found value {value} at t = {t}")]
    MeasureMismatch { t: usize, value: f64 },
}

impl TansError {
    pub(crate) fn param(name: &'static str, value: f64, expected: &'static str) -> Self {
        TansError::InvalidParameter { name, value, expected }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        TansError::Precondition(msg.into())
    }
}

/// Checks `lo < value < hi` (open interval).
pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(TansError::param(name, value, "a value in (0, 1)"))
    }
}
