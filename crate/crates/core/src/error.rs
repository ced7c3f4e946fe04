use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch for {what}: expected {expected}, found {found}")]
    SizeMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field is not divergence-free (relative residual {residual:.3e})")]
    NotDivergenceFree { residual: f64 },

    #[error(
        "non-finite velocity at t = {time:.6} after step {step} with dt = {dt:.3e}; \
         the CFL limit at the last finite state was dt <= {cfl_dt:.3e} \
         (max |u| = {max_speed:.3e}); reduce dt or the CFL number"
    )]
    Unstable {
        time: f64,
        step: u64,
        dt: f64,
        cfl_dt: f64,
        max_speed: f64,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }
}
