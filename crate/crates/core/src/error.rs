use thiserror::Error;

/// Broad class of a failure, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Physics,
    Numerical,
    Io,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 4] = [
        ErrorClass::Config,
        ErrorClass::Physics,
        ErrorClass::Numerical,
        ErrorClass::Io,
    ];

    /// Process exit status for this class.
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Physics => 3,
            ErrorClass::Numerical => 4,
            ErrorClass::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Config => "config",
            ErrorClass::Physics => "physics",
            ErrorClass::Numerical => "numerical",
            ErrorClass::Io => "io",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown material `{name}` (registry: {known})")]
    UnknownMaterial { name: String, known: String },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("barrier collapse: effective height {height_j:e} J <= 0 at V_GS = {v_gs} V")]
    BarrierCollapse { height_j: f64, v_gs: f64 },

    #[error("carrier energy {e0_j:e} J is at or above the barrier {v0_j:e} J")]
    AboveBarrier { v0_j: f64, e0_j: f64 },

    #[error("{what}: argument {value:e} outside domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("bias {i_bias:e} A does not exceed I_C = {i_c:e} A; Q-point is on the supercurrent branch")]
    BranchViolation { i_bias: f64, i_c: f64 },

    #[error("steering failure: {device} has I_C = {i_c:e} A below I_bias = {i_bias:e} A")]
    SteeringFailure {
        device: &'static str,
        i_c: f64,
        i_bias: f64,
    },

    #[error("closed-form bracket evaluated to {value:e} (outside the approximation's regime)")]
    NegativeBracket { value: f64 },

    #[error("quadrature did not converge: value {value:e}, error estimate {error_estimate:e}")]
    NonConvergence { value: f64, error_estimate: f64 },

    #[error("integrand is not finite at x = {at:e}")]
    NonFinite { at: f64 },

    #[error("root not bracketed: f({lo:e}) = {f_lo:e}, f({hi:e}) = {f_hi:e}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::UnknownMaterial { .. } | Error::Parse { .. } | Error::Config(_) => ErrorClass::Config,
            Error::NonConvergence { .. } | Error::NonFinite { .. } | Error::NoBracket { .. } => {
                ErrorClass::Numerical
            }
            Error::Io { .. } => ErrorClass::Io,
            _ => ErrorClass::Physics,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}
