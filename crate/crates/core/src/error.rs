use thiserror::Error;

/// Errors raised across the library. The CLI maps them onto exit codes with
/// [`Error::is_numeric`].
#[derive(Debug, Error)]
pub enum Error {
    /// Grids or shapes that cannot be combined.
    #[error("structural error: {0}")]
    Structural(String),

    /// An argument outside the admissible range. `param` names the offending
    /// input so the CLI can point at the flag.
    #[error("domain error in `{param}`: {message}")]
    Domain { param: String, message: String },

    #[error("unsupported variant: {0}")]
    Unsupported(String),

    #[error("noise transform has a root inside the kernel band at t = {root}; use psi_star with a regularized transfer")]
    MustRegularize { root: f64 },

    #[error("degenerate region around root {index}: threshold {threshold} reaches the lobe maximum {lobe_max}")]
    DegenerateRegion {
        index: i64,
        threshold: f64,
        lobe_max: f64,
    },

    #[error("division guard: {0}")]
    DivisionGuard(String),

    #[error("value out of floating-point range: {0}")]
    NumericRange(String),

    #[error("no convergence after {iterations} iterations (objective {objective:e})")]
    NonConvergence {
        iterations: usize,
        objective: f64,
        last_iterate: Vec<f64>,
    },

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(param: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Domain {
            param: param.into(),
            message: message.into(),
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NumericRange(_)
                | Error::NonConvergence { .. }
                | Error::DivisionGuard(_)
                | Error::DegenerateRegion { .. }
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
