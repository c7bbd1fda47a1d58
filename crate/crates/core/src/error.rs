use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("unsupported dimension d = {0} (only d = 3 is supported here)")]
    UnsupportedDimension(u32),

    #[error("unsupported sector: {0}")]
    UnsupportedSector(String),

    #[error("{what} did not converge: {detail}")]
    NotConverged { what: &'static str, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("m = {m} is not below the critical mass m_c = {m_c}: the particle already binds at zero coupling")]
    AlreadyBinding { m: f64, m_c: f64 },

    #[error("ODE solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
