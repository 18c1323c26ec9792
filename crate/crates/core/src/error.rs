use thiserror::Error;

/// Errors produced anywhere in the collocation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A kernel pairing asked for more derivatives than the family supports.
    #[error("derivative order {requested} exceeds the {family} kernel budget of {budget}")]
    UnsupportedOrder {
        family: String,
        requested: usize,
        budget: usize,
    },

    /// Cholesky failed even after the one-time nugget escalation.
    #[error(
        "Cholesky factorization failed for a {size}x{size} Gram matrix \
         (nugget {nugget:e}, diagonal range [{min_diag:e}, {max_diag:e}])"
    )]
    Factorization {
        size: usize,
        nugget: f64,
        min_diag: f64,
        max_diag: f64,
    },

    #[error("solver variant `{0}` is not available for this problem")]
    UnsupportedVariant(String),

    #[error("empty point set")]
    EmptyPointSet,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
