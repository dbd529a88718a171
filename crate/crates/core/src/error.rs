use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside [{min}, {max}]")]
    Range {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("inconsistent mechanism geometry: {0}")]
    Geometry(String),
    #[error("thruster {index} force {force} N exceeds bound {f_max} N")]
    Saturation {
        index: usize,
        force: f64,
        f_max: f64,
    },
    #[error("invalid hydrodynamic parameters: {0}")]
    Parameter(String),
    #[error("non-finite {component} after integration")]
    Numerical { component: &'static str },
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("polynomial fit needs at least {needed} distinct lengths, got {got}")]
    Rank { needed: usize, got: usize },
    #[error("identification failed: {0}")]
    Identification(String),
    #[error("misaligned series: {0}")]
    Misaligned(String),
    #[error("degenerate reference: {0}")]
    Reference(String),
    #[error("mission planning error: {0}")]
    Planning(String),
    #[error("mission aborted in {phase}: {reason}")]
    MissionAborted { phase: String, reason: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed log: {0}")]
    Log(String),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
