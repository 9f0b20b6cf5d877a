use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("temperature {0} K outside the tabulated range [{1}, {2}] K")]
    TemperatureOutOfRange(f64, f64, f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("effective anisotropy field is negative ({0:.3e} A/m): easy-plane regime")]
    EasyPlane(f64),

    #[error("node solver did not converge after {iterations} iterations (residual {residual:.3e} V)")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Monte Carlo trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("root search for {what} failed: no sign change on [{lo}, {hi}]")]
    NoBracket { what: String, lo: f64, hi: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
