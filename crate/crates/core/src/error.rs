use thiserror::Error;

/// Errors raised by the simulator. Every variant maps onto one of the
/// process exit codes used by the command-line tool.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("boost constraint violated: v_in = {v_in:.3} V >= vout = {vout:.3} V")]
    Mode { v_in: f64, vout: f64 },

    #[error("CCM boundary violated: valley current {i_start:.6} A < 0")]
    Boundary { i_start: f64 },

    #[error("core saturation: B = {b:.4} T exceeds Bsat = {b_sat:.4} T")]
    Saturation { b: f64, b_sat: f64 },

    #[error("undersampled: {n_samples} samples, at least {required} needed")]
    Undersampled { n_samples: usize, required: usize },

    #[error("singular thermal network: {0}")]
    Singular(String),

    #[error("invalid value at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Infeasible(_) => "infeasible",
            Error::Mode { .. } => "mode",
            Error::Boundary { .. } => "boundary",
            Error::Saturation { .. } => "saturation",
            Error::Undersampled { .. } => "undersampled",
            Error::Singular(_) => "singular",
            Error::Validation { .. } => "validation",
            Error::Parse { .. } => "parse",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    /// Exit code: 1 validation, 2 runtime, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Validation { .. } | Error::Parse { .. } | Error::Format(_) => 1,
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            return Error::Io(e.to_string());
        }
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
