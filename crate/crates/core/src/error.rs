use thiserror::Error;

/// Errors raised by the toolkit. Residuals and thresholds are reported as
/// `f64` regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not diagonalizable (left/right Gram pivot {pivot:.3e} below {threshold:.3e})")]
    NonDiagonalizable { pivot: f64, threshold: f64 },

    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("spectrum is not real (eigenvalue with imaginary part {imag:.3e})")]
    ComplexSpectrum { imag: f64 },

    #[error("lambda must be strictly positive")]
    NonPositiveLambda,

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("operator is not quasi-Hermitian for the given metric (residual {residual:.3e})")]
    NotQuasiHermitian { residual: f64 },

    #[error("map is not a certified intertwiner between the metrics (residual {residual:.3e})")]
    NotIntertwiner { residual: f64 },

    #[error("hamiltonian is not pseudo-Hermitian for the {which} metric (residual {residual:.3e})")]
    IncompatibleMetric { which: &'static str, residual: f64 },

    #[error("algebra span exceeds ambient dimension squared ({0})")]
    BasisOverflow(usize),

    #[error("state functional is not positive (Gram eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state functional is not normalized (value on identity {value})")]
    NotNormalized { value: String },

    #[error("frame sampling operator is singular (condition number {condition:.3e})")]
    SingularFrame { condition: f64 },

    #[error("expectation {index} = {value:.6} lies outside [-{bound:.6}, {bound:.6}]")]
    InconsistentData { index: usize, value: f64, bound: f64 },

    #[error("POVM elements do not sum to the identity (residual {residual:.3e})")]
    IncompletePovm { residual: f64 },

    #[error("POVM element {index} is not of the form 1 (x) Pi after Hermitisation (residual {residual:.3e})")]
    NotLocalPovm { index: usize, residual: f64 },

    #[error("global state is not pure (purity {purity:.10})")]
    MixedGlobalState { purity: f64 },

    #[error("time step too large: dt * ||H_e|| = {value:.3e} exceeds {limit}")]
    StepTooLarge { value: f64, limit: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Whether the error stems from malformed or inconsistent input rather
    /// than a numerical failure on otherwise valid input.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NonDiagonalizable { .. }
                | Error::NoConvergence
                | Error::NotPositiveDefinite { .. }
                | Error::ComplexSpectrum { .. }
                | Error::SingularFrame { .. }
                | Error::BasisOverflow(_)
                | Error::MixedGlobalState { .. }
                | Error::NotQuasiHermitian { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
