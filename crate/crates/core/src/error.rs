use thiserror::Error;

/// Everything that can go wrong inside the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },

    #[error("singular auxiliary radius (rho -> 0) at t = {t}")]
    Singular { t: f64 },

    #[error("t = {t} outside window [{lo}, {hi}]")]
    OutOfWindow { t: f64, lo: f64, hi: f64 },

    #[error("constraint violated: {what} (residual {residual:e})")]
    Constraint { what: String, residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("invalid `{field}`: {message}")]
    Config { field: &'static str, message: String },

    /// A failure attributed to the time at which it happened.
    #[error("{cause} at t = {t}")]
    Located { t: f64, cause: Box<Error> },
}

impl Error {
    /// Time at which a numerical failure happened, if the error carries one.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::Located { cause, .. } => cause.is_config(),
            _ => false,
        }
    }

    /// Attaches a time to errors that do not carry one.
    pub fn at(self, t: f64) -> Error {
        if self.time().is_some() {
            self
        } else {
            Error::Located { t, cause: Box::new(self) }
        }
    }

    pub fn time(&self) -> Option<f64> {
        match *self {
            Error::StepUnderflow { t } | Error::NonFinite { t } | Error::Singular { t } => Some(t),
            Error::OutOfWindow { t, .. } | Error::Located { t, .. } => Some(t),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
