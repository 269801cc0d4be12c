use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("compatibility violated: mean(rho - n_e) = {residual:e} (tolerance {tol:e})")]
    Compatibility { residual: f64, tol: f64 },

    #[error("truncated mass beyond k_max is {ratio:e} of the total (limit {limit:e}); raise k_max")]
    Cutoff { ratio: f64, limit: f64 },

    #[error("k = 0 node present: {0} is singular there; use a cell-centered k grid")]
    Singularity(&'static str),

    #[error("foot iteration does not contract along {axis} (dt * |du/dx| = {lipschitz:.3}); reduce dt below {suggested_dt:e}")]
    FootIteration {
        axis: &'static str,
        lipschitz: f64,
        suggested_dt: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse { .. } | Error::Cutoff { .. } => 2,
            Error::Compatibility { .. } => 4,
            _ => 3,
        }
    }
}
