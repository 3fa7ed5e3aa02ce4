use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or input violates its documented invariant.
    InvalidInput(String),
    /// The plant integrator produced a non-finite state.
    PlantDivergence,
    /// A controller belief became non-finite at the given step.
    ControllerDivergence { step: usize },
    /// One of the fault-isolation estimators became non-finite.
    IsolationDivergence { step: usize },
    /// A point fell outside the region where the lens model is invertible.
    OutOfWorkspace { radius: f64, limit: f64 },
    /// The lens distortion folds over inside the requested workspace.
    NonInvertibleDistortion { radius: f64 },
    /// The GP covariance matrix could not be factorized, even with jitter.
    IllConditionedKernel { min_eigenvalue: f64 },
    /// Not enough healthy runs (or samples) to estimate residual moments.
    InsufficientCalibration { got: usize, need: usize },
    /// A residual covariance stayed singular after regularization.
    SingularCovariance { step: Option<usize>, diagonal: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::PlantDivergence => f.write_str("plant state became non-finite"),
            Error::ControllerDivergence { step } => {
                write!(f, "controller belief diverged at step {step}")
            }
            Error::IsolationDivergence { step } => {
                write!(f, "isolation estimator diverged at step {step}")
            }
            Error::OutOfWorkspace { radius, limit } => write!(
                f,
                "point at radius {radius:.4} m lies outside the calibrated camera workspace ({limit:.4} m)"
            ),
            Error::NonInvertibleDistortion { radius } => write!(
                f,
                "radial distortion is not invertible at radius {radius:.4} m"
            ),
            Error::IllConditionedKernel { min_eigenvalue } => write!(
                f,
                "kernel matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})"
            ),
            Error::InsufficientCalibration { got, need } => {
                write!(f, "insufficient calibration data: {got} < {need}")
            }
            Error::SingularCovariance { step, diagonal } => match step {
                Some(k) => write!(f, "residual covariance at step {k} is singular (diag {diagonal})"),
                None => write!(f, "stationary residual covariance is singular (diag {diagonal})"),
            },
        }
    }
}

impl core::error::Error for Error {}
