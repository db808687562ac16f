use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{random_positive_definite_with, HermitianMatrix, PositiveDefiniteMatrix};
use crate::rng::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub s: f64,
    /// `"sup"` for `s > 1` or `s < 0`, `"inf"` for `0 < s < 1`.
    pub kind: String,
    pub target: f64,
    /// Objective at the optimizer `Y = X^{s-1}`.
    pub attained: f64,
    pub attainment_error: f64,
    pub samples: usize,
    /// Worst signed excursion past the bound over random `Y`; positive is a violation.
    pub worst_bound_excess: f64,
}

impl VariationalReport {
    pub fn passed(&self, attain_tol: f64, bound_tol: f64) -> bool {
        let scale = self.target.abs().max(1.0);
        self.attainment_error <= attain_tol * scale && self.worst_bound_excess <= bound_tol * scale
    }
}

fn trace_product(x: &HermitianMatrix, y: &HermitianMatrix) -> f64 {
    let (a, b) = (x.as_matrix(), y.as_matrix());
    let n = x.dim();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (a[(i, j)] * b[(j, i)]).re))
        .sum()
}

/// Objective of the variational formula for `Tr X^s` at `Y`.
pub fn variational_objective(
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    s: f64,
) -> Result<f64> {
    let xy = trace_product(x.as_hermitian(), y.as_hermitian());
    if !(0.0..=1.0).contains(&s) {
        let r = s / (s - 1.0);
        Ok(s * xy - (s - 1.0) * y.pow(r).trace())
    } else if s > 0.0 && s < 1.0 {
        let r = -s / (1.0 - s);
        Ok(s * xy + (1.0 - s) * y.pow(r).trace())
    } else {
        Err(Error::InvalidParameter(format!(
            "s must differ from 0 and 1, got {s}"
        )))
    }
}

/// `Tr X^s = sup_{Y>=0} (s Tr XY - (s-1) Tr Y^{s/(s-1)})` for `s > 1` or `s < 0`, and
/// `Tr X^s = inf_{Y>0} (s Tr XY + (1-s) Tr Y^{-s/(1-s)})` for `0 < s < 1`.
/// Both are attained at `Y = X^{s-1}`.
pub fn verify_variational(
    x: &PositiveDefiniteMatrix,
    s: f64,
    n_random_y: usize,
    seed: u64,
) -> Result<VariationalReport> {
    if !s.is_finite() || s == 0.0 || s == 1.0 {
        return Err(Error::InvalidParameter(format!("invalid s = {s}")));
    }
    let sup = !(0.0..=1.0).contains(&s);
    let target = x.pow(s).trace();
    let optimizer = PositiveDefiniteMatrix::new(x.pow(s - 1.0))?;
    let attained = variational_objective(x, &optimizer, s)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n_random_y {
        let mut rng = rng_for(seed, &[i as u64]);
        let y = random_positive_definite_with(x.dim(), (0.05, 5.0), &mut rng)?;
        let v = variational_objective(x, &y, s)?;
        let excess = if sup { v - target } else { target - v };
        worst = worst.max(excess);
    }
    Ok(VariationalReport {
        s,
        kind: if sup { "sup" } else { "inf" }.to_string(),
        target,
        attained,
        attainment_error: (attained - target).abs(),
        samples: n_random_y,
        worst_bound_excess: worst,
    })
}

/// `Tr (Y^{s/2} X^s Y^{s/2})^{1/s} <= Tr XY` for PSD `X, Y` and `0 < s < 1`,
/// with slack `1e-10 * max(1, Tr XY)`.
pub fn verify_lieb_thirring(x: &HermitianMatrix, y: &HermitianMatrix, s: f64) -> Result<bool> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "s must lie in (0, 1), got {s}"
        )));
    }
    let (lhs, rhs) = lieb_thirring_sides(x, y, s)?;
    Ok(lhs <= rhs + 1e-10 * rhs.abs().max(1.0))
}

pub(crate) fn lieb_thirring_sides(
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    s: f64,
) -> Result<(f64, f64)> {
    let (sx, sy) = (x.eig()?, y.eig()?);
    let floor = crate::tolerance::tolerances().eigenvalue_floor;
    for sp in [&sx, &sy] {
        if sp.min() < -floor * sp.max().abs().max(1.0) {
            return Err(Error::Domain {
                eigenvalue: sp.min(),
                function: "Lieb-Thirring (needs PSD inputs)".into(),
            });
        }
    }
    let yh = sy.support_power(s / 2.0);
    let inner = yh
        .as_matrix()
        .matmul(&sx.support_power(s).as_matrix().matmul(yh.as_matrix())?)?;
    let inner = HermitianMatrix::symmetrize(&inner)?.eig()?;
    let lhs: f64 = inner.support_power_values(1.0 / s).iter().sum();
    Ok((lhs, trace_product(x, y)))
}

/// Quadrature check of `x^σ = (sin πσ / π) ∫_0^∞ (1 + t/x)^{-1} t^{σ-1} dt`.
///
/// The substitution `t = x u / (1 - u)` maps `[δ, 1-δ]` to a compact `t`-window
/// handled by Gauss-Legendre; both tails are summed from their convergent
/// series. Returns `|quadrature - x^σ|`.
pub fn verify_integral_representation(x: f64, sigma: f64, n_nodes: usize) -> Result<f64> {
    Ok((integral_representation(x, sigma, n_nodes)? - x.powf(sigma)).abs())
}

pub fn integral_representation(x: f64, sigma: f64, n_nodes: usize) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must lie in (0, 1), got {sigma}"
        )));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "x must be positive, got {x}"
        )));
    }
    let quad = GaussLegendre::new(n_nodes.max(2)).map_err(|e| Error::Numerical(e.to_string()))?;
    const DELTA: f64 = 0.05;
    let body = quad.integrate(DELTA, 1.0 - DELTA, |u| {
        let t = x * u / (1.0 - u);
        let dt = x / ((1.0 - u) * (1.0 - u));
        t.powf(sigma - 1.0) / (1.0 + t / x) * dt
    });
    let ratio = DELTA / (1.0 - DELTA);
    // ∫_0^{t0}: expand (1 + t/x)^{-1} in powers of t/x <= ratio.
    let t0 = x * ratio;
    let mut head = 0.0;
    // ∫_{T}^∞: expand in powers of x/t <= ratio.
    let big_t = x / ratio;
    let mut tail = 0.0;
    let mut k = 0;
    loop {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        let h = sign * x.powi(-k) * t0.powf(sigma + kf) / (sigma + kf);
        let g = sign * x.powi(k + 1) * big_t.powf(sigma - 1.0 - kf) / (1.0 + kf - sigma);
        head += h;
        tail += g;
        if (h.abs() <= 1e-18 * head.abs() && g.abs() <= 1e-18 * tail.abs()) || k > 200 {
            break;
        }
        k += 1;
    }
    Ok((PI * sigma).sin() / PI * (head + body + tail))
}
