use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    /// Bad input: missing field, wrong sign, mismatched array lengths.
    #[error("validation error: {0}")]
    Validation(String),

    /// The drift matrix is not strictly stable; a Lyapunov solve was refused.
    #[error("unstable drift matrix: max Re(eigenvalue) = {max_re}")]
    Unstable { max_re: f64 },

    /// The vectorized Lyapunov system could not be solved.
    #[error("singular Lyapunov system (norm estimate {norm_estimate:.3e})")]
    SingularLyapunov { norm_estimate: f64 },

    /// A solve finished but failed its own residual or consistency check.
    #[error("numerical consistency failure in {context}: residual {residual:.3e}")]
    Consistency { context: String, residual: f64 },

    /// No sign change of the target function inside the given bracket.
    #[error("no crossing of {target} inside bracket [{lo:.6e}, {hi:.6e}]")]
    Bracket { target: String, lo: f64, hi: f64 },

    /// Root finder was handed a degenerate (all-zero) polynomial.
    #[error("degenerate polynomial: all coefficients are zero")]
    DegeneratePolynomial,

    /// Dense-scan oracle: sign at x_max indicates roots beyond the range.
    #[error("scan range too small: f({x_max:.6e}) < 0 indicates roots beyond x_max")]
    ScanRange { x_max: f64 },

    /// Oracle integrator step size produced norm growth on a stable system.
    #[error("covariance integration diverged with dt = {dt:.3e}")]
    StepInstability { dt: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 for validation/input errors, 3 for solver errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
