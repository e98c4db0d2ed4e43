use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("point {0:?} lies outside the domain")]
    PointOutsideDomain(Vec<f64>),

    #[error("unsupported polynomial order {0}")]
    UnsupportedOrder(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate coefficient: 1 - a*h = {value:.3e} at x = {point:?}")]
    DegenerateCoefficient { value: f64, point: Vec<f64> },

    #[error("newton iteration did not converge: residual {residual:.3e} > tol {tol:.3e} after {iters} iterations")]
    NewtonDiverged { iters: usize, residual: f64, tol: f64 },

    #[error("singular linear system: {0}")]
    SingularLinearSystem(String),

    #[error("step {step} (t = {t:.6e}) failed: {source}")]
    StepFailed {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error comes from the numerical solution rather than from
    /// the inputs or the file system.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::DegenerateCoefficient { .. }
                | Error::NewtonDiverged { .. }
                | Error::SingularLinearSystem(_)
                | Error::StepFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
