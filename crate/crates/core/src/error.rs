use thiserror::Error;

pub type Result<T> = std::result::Result<T, GfError>;

#[derive(Debug, Error)]
pub enum GfError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("grid cannot resolve {what}: {detail}")]
    Unresolved { what: String, detail: String },

    #[error("support violation: {0}")]
    Support(String),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("aliasing detected: boundary energy {energy:.3e} exceeds {limit:.1e}")]
    Aliasing { energy: f64, limit: f64 },

    #[error("coefficient violates t*b(t) > 0 at t = {t}")]
    SignCondition { t: f64 },

    #[error("positive exponent {exponent:.3e} in branch integral at t = {t}, xi = {xi}")]
    PositiveExponent { t: f64, xi: f64, exponent: f64 },

    #[error(
        "complex argument |z| = {modulus:.4} outside the certified disk of radius {radius:.4}"
    )]
    OutsideCertifiedDisk { modulus: f64, radius: f64 },

    #[error("tolerance exceeded: {what} = {value:.3e} > {tol:.1e}")]
    Tolerance { what: String, value: f64, tol: f64 },

    #[error("growth gate failed: {0}")]
    Gate(String),

    #[error("pairing diverges: {0}")]
    Divergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl GfError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GfError::InvalidParameter(msg.into())
    }
}
