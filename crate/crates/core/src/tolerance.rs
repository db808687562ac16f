//! Numerical tolerances shared by every module.
//!
//! The active record is installed once (optionally from a JSON override
//! file) and is read-only afterwards. Library code reads it through
//! [`tolerances`].

use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming an optional tolerance-override JSON file.
pub const TOLERANCE_FILE_ENV: &str = "DIVLAB_TOLERANCE_FILE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Entrywise |M - M*| accepted when building a Hermitian matrix.
    pub hermitian: f64,
    /// Smallest eigenvalue accepted for positive definite matrices, negative
    /// powers and logarithms.
    pub eigenvalue_floor: f64,
    /// |tr rho - 1| accepted for density matrices.
    pub density_trace: f64,
    /// Frobenius defect of U U* - I accepted for unitaries.
    pub unitary: f64,
    /// Relative Frobenius reconstruction error of a spectrum, per unit dimension.
    pub reconstruction: f64,
    /// Jacobi stops once the off-diagonal Frobenius norm is below this times ||M||_F.
    pub jacobi_off_diagonal: f64,
    pub jacobi_max_sweeps: usize,
    /// Frobenius defect of sum K_j* K_j - I accepted for Kraus channels.
    pub kraus_completeness: f64,
    /// Relative midpoint margin above which a probe sample counts as a violation.
    pub violation_relative: f64,
    /// Absolute margin a counterexample witness must exceed.
    pub counterexample_margin: f64,
    /// Relative bound on line second differences for concave functionals.
    pub line_second_difference: f64,
    /// Relative slack used when comparing parameters against region boundaries.
    pub boundary_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            eigenvalue_floor: 1e-10,
            density_trace: 1e-12,
            unitary: 1e-10,
            reconstruction: 1e-9,
            jacobi_off_diagonal: 1e-13,
            jacobi_max_sweeps: 100,
            kraus_completeness: 1e-10,
            violation_relative: 1e-8,
            counterexample_margin: 1e-6,
            line_second_difference: 1e-6,
            boundary_slack: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let tol: Tolerances = serde_json::from_str(&text)?;
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hermitian", self.hermitian),
            ("eigenvalue_floor", self.eigenvalue_floor),
            ("density_trace", self.density_trace),
            ("unitary", self.unitary),
            ("reconstruction", self.reconstruction),
            ("jacobi_off_diagonal", self.jacobi_off_diagonal),
            ("kraus_completeness", self.kraus_completeness),
            ("violation_relative", self.violation_relative),
            ("counterexample_margin", self.counterexample_margin),
            ("line_second_difference", self.line_second_difference),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tolerance `{name}` must be finite and positive, got {value}"
                )));
            }
        }
        if !(self.boundary_slack.is_finite() && self.boundary_slack >= 0.0) {
            return Err(Error::InvalidParameter(
                "tolerance `boundary_slack` must be >= 0".into(),
            ));
        }
        if self.jacobi_max_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "tolerance `jacobi_max_sweeps` must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

static ACTIVE: OnceLock<Tolerances> = OnceLock::new();

/// The active tolerance record. Defaults apply unless [`install`] ran first.
pub fn tolerances() -> &'static Tolerances {
    ACTIVE.get_or_init(Tolerances::default)
}

/// Installs `tol` as the process-wide record. Fails if tolerances were
/// already read or installed.
pub fn install(tol: Tolerances) -> Result<()> {
    tol.validate()?;
    ACTIVE
        .set(tol)
        .map_err(|_| Error::InvalidParameter("tolerances already initialised".into()))
}

/// Installs the override named by `DIVLAB_TOLERANCE_FILE`, if the variable is set.
pub fn install_from_env() -> Result<Option<&'static Tolerances>> {
    match std::env::var_os(TOLERANCE_FILE_ENV) {
        Some(path) => {
            install(Tolerances::from_json_file(path)?)?;
            Ok(Some(tolerances()))
        }
        None => Ok(None),
    }
}
