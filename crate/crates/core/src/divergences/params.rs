use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent triple `(p, q, s)` of `Ψ_{p,q,s}`.
///
/// The α-z family lives on the slice `s = 1/(p+q)` through
/// `p = α/z`, `q = (1-α)/z`, `s = z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl ParamPoint {
    pub fn new(p: f64, q: f64, s: f64) -> Self {
        Self { p, q, s }
    }

    pub fn from_alpha_z(alpha: f64, z: f64) -> Result<Self> {
        validate_alpha_z(alpha, z)?;
        Ok(Self {
            p: alpha / z,
            q: (1.0 - alpha) / z,
            s: z,
        })
    }

    /// Inverse of [`ParamPoint::from_alpha_z`]: `α = p/(p+q)`, `z = 1/(p+q)`.
    /// Only defined for `p + q ≠ 0`; `s` is ignored.
    pub fn to_alpha_z(&self) -> Result<(f64, f64)> {
        let sum = self.p + self.q;
        if sum == 0.0 || !sum.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "p + q must be non-zero to convert to (alpha, z), got p={} q={}",
                self.p, self.q
            )));
        }
        Ok((self.p / sum, 1.0 / sum))
    }

    /// Whether `s = 1/(p+q)` within `rel_tol`.
    pub fn on_alpha_z_slice(&self, rel_tol: f64) -> bool {
        let sum = self.p + self.q;
        sum != 0.0 && (self.s * sum - 1.0).abs() <= rel_tol
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite() && self.s.is_finite()
    }

    /// `(p, q, s) ↦ (-p, -q, -s)`; pairs with `K ↦ K^{-*}`.
    pub fn sign_flipped(&self) -> Self {
        Self::new(-self.p, -self.q, -self.s)
    }

    /// `(p, q, s) ↦ (q, p, s)`; pairs with `(A, B, K) ↦ (B, A, K*)`.
    pub fn swapped(&self) -> Self {
        Self::new(self.q, self.p, self.s)
    }
}

pub(crate) fn validate_alpha_z(alpha: f64, z: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) || alpha == 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive and != 1, got {alpha}"
        )));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "z must be positive, got {z}"
        )));
    }
    Ok(())
}
