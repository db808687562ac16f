use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::divergences::{psi_on_spectra, ParamPoint};
use crate::error::{Error, Result};
use crate::matrix::{random_density, tensor, ComplexMatrix, DensityMatrix, HermitianMatrix};
use crate::rng::derive_seed;

/// The data-processing instance built from a convexity instance, with both margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub point: ParamPoint,
    pub theta: f64,
    /// `Ψ(ρ, σ)` for the flagged block states on `C^dim ⊗ C^2`.
    pub psi_flagged: f64,
    /// `Ψ(E ρ, E σ)` after tracing out the flag.
    pub psi_reduced: f64,
    /// `(1-θ) Ψ(ρ0, σ0) + θ Ψ(ρ1, σ1)`.
    pub psi_average: f64,
    /// `Ψ((1-θ)ρ0 + θρ1, (1-θ)σ0 + θσ1)`.
    pub psi_mixture: f64,
    pub dpi_margin: f64,
    pub convexity_margin: f64,
    pub margins_agree: bool,
    pub directions_match: bool,
}

fn flagged(x0: &DensityMatrix, x1: &DensityMatrix, theta: f64) -> Result<DensityMatrix> {
    let up = DensityMatrix::basis_projector(2, 0);
    let down = DensityMatrix::basis_projector(2, 1);
    let m = &tensor(x0.as_matrix(), up.as_matrix()).scale(1.0 - theta)
        + &tensor(x1.as_matrix(), down.as_matrix()).scale(theta);
    DensityMatrix::new_allow_singular(HermitianMatrix::new(m)?)
}

/// Builds `ρ = (1-θ) ρ0 ⊗ |↑><↑| + θ ρ1 ⊗ |↓><↓|` (and `σ` alike), traces out the
/// flag, and compares the data-processing margin of `Ψ` with the midpoint
/// convexity margin on the same quadruple. On `s = 1/(p+q)` they coincide.
pub fn monotonicity_equivalence_demo(
    pt: ParamPoint,
    dim: usize,
    theta: f64,
    seed: u64,
) -> Result<EquivalenceReport> {
    if pt.p + pt.q == 0.0 {
        return Err(Error::InvalidParameter("p + q must be non-zero".into()));
    }
    if !pt.on_alpha_z_slice(1e-12) {
        return Err(Error::InvalidParameter(format!(
            "point {pt:?} is not on s = 1/(p+q)"
        )));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in [0, 1], got {theta}"
        )));
    }
    let draw = |i: u64| random_density(dim, dim, derive_seed(seed, &[i]));
    let (r0, r1, s0, s1) = (draw(0)?, draw(1)?, draw(2)?, draw(3)?);
    let eye = |n: usize| ComplexMatrix::identity(n);
    let psi = |a: &DensityMatrix, b: &DensityMatrix| {
        psi_on_spectra(a.spectrum(), b.spectrum(), &eye(a.dim()), pt)
    };

    let rho = flagged(&r0, &r1, theta)?;
    let sigma = flagged(&s0, &s1, theta)?;
    let trace_flag = KrausChannel::partial_trace_channel(dim, 2, 2)?;
    let (er, es) = (trace_flag.apply(&rho)?, trace_flag.apply(&sigma)?);

    let psi_flagged = psi(&rho, &sigma)?;
    let psi_reduced = psi(&er, &es)?;
    let psi_average = (1.0 - theta) * psi(&r0, &s0)? + theta * psi(&r1, &s1)?;
    let psi_mixture = psi(&r0.mix(&r1, theta)?, &s0.mix(&s1, theta)?)?;

    let dpi_margin = psi_reduced - psi_flagged;
    let convexity_margin = psi_mixture - psi_average;
    let scale = psi_flagged.abs().max(1.0);
    // α > 1 pairs monotonicity with convexity, α < 1 with concavity.
    let (alpha, _) = pt.to_alpha_z()?;
    let sign = if alpha > 1.0 { 1.0 } else { -1.0 };
    let dpi_holds = sign * dpi_margin <= 1e-10 * scale;
    let convexity_holds = sign * convexity_margin <= 1e-10 * scale;
    Ok(EquivalenceReport {
        point: pt,
        theta,
        psi_flagged,
        psi_reduced,
        psi_average,
        psi_mixture,
        dpi_margin,
        convexity_margin,
        margins_agree: (dpi_margin - convexity_margin).abs() <= 1e-10 * scale
            && (psi_flagged - psi_average).abs() <= 1e-10 * scale,
        directions_match: dpi_holds == convexity_holds,
    })
}
