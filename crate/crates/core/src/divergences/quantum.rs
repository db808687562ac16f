use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DensityMatrix, Spectrum};
use crate::tolerance::tolerances;

use super::functionals::psi_on_spectra;
use super::params::{validate_alpha_z, ParamPoint};
use super::DivergenceValue;

/// Weight of `rho` outside the support of `sigma`: `Tr(P_ker(sigma) rho)`.
fn weight_off_support(rho: &DensityMatrix, sigma: &Spectrum) -> f64 {
    let cut = sigma.support_threshold();
    let kernel: Vec<f64> = sigma
        .eigenvalues()
        .iter()
        .map(|&l| if l > cut { 0.0 } else { 1.0 })
        .collect();
    if kernel.iter().all(|&w| w == 0.0) {
        return 0.0;
    }
    let p = sigma.synthesize(&kernel);
    trace_product(p.as_matrix(), rho.as_matrix())
}

/// `Re Tr(XY)` without forming the product.
fn trace_product(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let n = x.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (x[(i, j)] * y[(j, i)]).re;
        }
    }
    acc
}

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::mismatch(
            "rho and sigma dimensions",
            rho.dim(),
            sigma.dim(),
        ));
    }
    Ok(())
}

fn supported(rho: &DensityMatrix, sigma: &DensityMatrix) -> bool {
    weight_off_support(rho, sigma.spectrum()) <= tolerances().eigenvalue_floor
}

/// The α-z Rényi divergence
/// `(α-1)^{-1} ln( Tr(σ^{(1-α)/2z} ρ^{α/z} σ^{(1-α)/2z})^z / Tr ρ )`.
///
/// Powers act on supports. For `α > 1` a `ρ` not supported inside `σ` gives `+∞`;
/// for `α < 1` so do orthogonal supports.
pub fn d_alpha_z(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
    z: f64,
) -> Result<DivergenceValue> {
    validate_alpha_z(alpha, z)?;
    check_dims(rho, sigma)?;
    if alpha > 1.0 && !supported(rho, sigma) {
        return Ok(DivergenceValue::infinite());
    }
    let pt = ParamPoint::from_alpha_z(alpha, z)?;
    let n = rho.dim();
    let q = psi_on_spectra(
        rho.spectrum(),
        sigma.spectrum(),
        &ComplexMatrix::identity(n),
        pt,
    )?;
    if q.is_nan() || q <= 0.0 {
        return Ok(DivergenceValue::infinite());
    }
    Ok(DivergenceValue::finite(
        (q / rho.trace()).ln() / (alpha - 1.0),
    ))
}

/// Petz Rényi divergence `(α-1)^{-1} ln Tr ρ^α σ^{1-α}`.
pub fn d_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<DivergenceValue> {
    d_alpha_z(rho, sigma, alpha, 1.0)
}

/// Sandwiched Rényi divergence, the `z = α` member.
pub fn d_sandwiched(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
) -> Result<DivergenceValue> {
    d_alpha_z(rho, sigma, alpha, alpha)
}

/// `Tr ρ (log ρ - log σ)` with `0 log 0 = 0`.
pub fn umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    if !supported(rho, sigma) {
        return Ok(DivergenceValue::infinite());
    }
    let neg_entropy = -von_neumann_entropy(rho);
    let cross = trace_product(rho.as_matrix(), sigma.spectrum().support_log().as_matrix());
    Ok(DivergenceValue::finite(neg_entropy - cross))
}

/// `-Tr ρ log ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let cut = rho.spectrum().support_threshold();
    -rho.spectrum()
        .eigenvalues()
        .iter()
        .filter(|&&l| l > cut)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

/// Belavkin-Staszewski relative entropy `Tr ρ log(ρ^{1/2} σ^{-1} ρ^{1/2})`.
pub fn bs_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    if !supported(rho, sigma) {
        return Ok(DivergenceValue::infinite());
    }
    let half = rho.support_power(0.5);
    let sinv = sigma.spectrum().support_power(-1.0);
    let x = half
        .as_matrix()
        .matmul(&sinv.as_matrix().matmul(half.as_matrix())?)?;
    let x = crate::matrix::HermitianMatrix::symmetrize(&x)?;
    let log_x = x.eig()?.support_log();
    Ok(DivergenceValue::finite(trace_product(
        rho.as_matrix(),
        log_x.as_matrix(),
    )))
}
