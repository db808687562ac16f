use serde::{Deserialize, Serialize};

use crate::divergences::{bs_entropy, umegaki};
use crate::error::{Error, Result};
use crate::matrix::DensityMatrix;

/// Commutator norm above which the pair counts as non-commuting.
pub const NONCOMMUTING_THRESHOLD: f64 = 1e-8;
pub const GAP_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsGapReport {
    pub umegaki: f64,
    pub bs: f64,
    /// `bs - umegaki`, never below `-1e-10`.
    pub gap: f64,
    /// Frobenius norm of `[ρ, σ]`.
    pub commutator_norm: f64,
    /// Whether the pair is non-commuting and the gap is strictly positive.
    pub strict: bool,
}

pub fn bs_gap_report(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<BsGapReport> {
    if !sigma.is_full_rank() {
        return Err(Error::InvalidParameter(
            "sigma must be positive definite".into(),
        ));
    }
    let u = umegaki(rho, sigma)?.value;
    let b = bs_entropy(rho, sigma)?.value;
    let commutator_norm = rho
        .as_matrix()
        .commutator(sigma.as_matrix())?
        .frobenius_norm();
    let gap = b - u;
    if gap < -GAP_THRESHOLD {
        return Err(Error::Numerical(format!(
            "BS entropy {b} below Umegaki {u}"
        )));
    }
    Ok(BsGapReport {
        umegaki: u,
        bs: b,
        gap,
        commutator_norm,
        strict: commutator_norm > NONCOMMUTING_THRESHOLD && gap > GAP_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_density, ComplexMatrix};

    #[test]
    fn commuting_pair_has_no_gap() {
        let rho = DensityMatrix::from_probabilities(&[0.2, 0.8]).unwrap();
        let sigma = DensityMatrix::from_probabilities(&[0.6, 0.4]).unwrap();
        let r = bs_gap_report(&rho, &sigma).unwrap();
        assert!(r.gap.abs() < 1e-10 && !r.strict);
    }

    #[test]
    fn smoothed_plus_against_diagonal() {
        let h = 0.5 * 0.95;
        let rho = DensityMatrix::from_matrix(
            ComplexMatrix::from_real_rows(&[&[0.5, h], &[h, 0.5]]).unwrap(),
        )
        .unwrap();
        let sigma = DensityMatrix::from_probabilities(&[0.7, 0.3]).unwrap();
        let r = bs_gap_report(&rho, &sigma).unwrap();
        assert!(r.strict && r.gap > 1e-3);
    }

    #[test]
    fn equal_states() {
        let rho = random_density(3, 3, 2).unwrap();
        let r = bs_gap_report(&rho, &rho).unwrap();
        assert!(r.umegaki.abs() < 1e-10 && r.bs.abs() < 1e-10 && r.gap.abs() < 1e-10);
    }

    #[test]
    fn singular_sigma_rejected() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(bs_gap_report(&rho, &DensityMatrix::basis_projector(2, 1)).is_err());
    }
}
