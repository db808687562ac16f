use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e} below floor {floor:.1e})")]
    NotPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("eigenvalue {eigenvalue:.3e} outside the domain of {function}")]
    Domain { eigenvalue: f64, function: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inner matrix is singular (min eigenvalue {min_eigenvalue:.3e}) while the outer power is {power}")]
    SingularInner { min_eigenvalue: f64, power: f64 },

    #[error("channel carries no dilation metadata")]
    MissingDilation,

    #[error("channel is not trace preserving (completeness defect {defect:.3e})")]
    NotTracePreserving { defect: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("evaluation failed at sample {sample}: {source}")]
    AtSample {
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("probe contradicts the {label} label at {point}{}", witness.as_ref().map(|w| format!(" (witness {})", w.display())).unwrap_or_default())]
    Contradiction {
        point: String,
        label: String,
        witness: Option<std::path::PathBuf>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn mismatch(
        context: &'static str,
        expected: impl ToString,
        found: impl ToString,
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn at_sample(self, sample: usize) -> Self {
        Error::AtSample {
            sample,
            source: Box::new(self),
        }
    }
}
