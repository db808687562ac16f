use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Domain, HermitianMatrix, PositiveDefiniteMatrix, Spectrum};
use crate::tolerance::tolerances;

use super::params::ParamPoint;

/// `B^{q/2} K* A^p K B^{q/2}`, re-Hermitized.
fn inner(
    a_pow: &HermitianMatrix,
    b_half: &HermitianMatrix,
    k: &ComplexMatrix,
) -> Result<HermitianMatrix> {
    if k.rows() != a_pow.dim() || k.cols() != b_half.dim() {
        return Err(Error::mismatch(
            "K must map the B space into the A space",
            format!("{}x{}", a_pow.dim(), b_half.dim()),
            format!("{}x{}", k.rows(), k.cols()),
        ));
    }
    let kak = k.adjoint().matmul(&a_pow.as_matrix().matmul(k)?)?;
    let m = b_half
        .as_matrix()
        .matmul(&kak.matmul(b_half.as_matrix())?)?;
    HermitianMatrix::symmetrize(&m)
}

/// `Tr M^s` for PSD `M`; for `s <= 0` the inner matrix must clear the floor.
fn trace_power(m: &HermitianMatrix, s: f64) -> Result<f64> {
    let spec = m.eig()?;
    let floor = tolerances().eigenvalue_floor;
    if s <= 0.0 {
        if spec.min() < floor {
            return Err(Error::SingularInner {
                min_eigenvalue: spec.min(),
                power: s,
            });
        }
        return Ok(spec.eigenvalues().iter().map(|l| l.powf(s)).sum());
    }
    if spec.min() < -floor * spec.max().abs().max(1.0) {
        return Err(Error::Domain {
            eigenvalue: spec.min(),
            function: "trace power of the inner matrix".into(),
        });
    }
    Ok(spec.eigenvalues().iter().map(|l| l.max(0.0).powf(s)).sum())
}

/// `Ψ_{p,q,s}(A, B) = Tr (B^{q/2} K* A^p K B^{q/2})^s`.
pub fn psi(
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    k: &ComplexMatrix,
    pt: ParamPoint,
) -> Result<f64> {
    check_point(pt)?;
    let m = inner(&a.pow(pt.p), &b.pow(pt.q / 2.0), k)?;
    trace_power(&m, pt.s)
}

/// `Ψ` for positive semidefinite arguments given by their spectra.
///
/// Every power, including the outer one, acts on the support only (zero on
/// the kernel). On positive definite inputs with a nonsingular inner matrix it
/// agrees with [`psi`].
pub fn psi_on_spectra(
    a: &Spectrum,
    b: &Spectrum,
    k: &ComplexMatrix,
    pt: ParamPoint,
) -> Result<f64> {
    check_point(pt)?;
    let m = inner(&a.support_power(pt.p), &b.support_power(pt.q / 2.0), k)?;
    let spec = m.eig()?;
    Ok(spec.support_power_values(pt.s).iter().sum())
}

/// `Ψ` evaluated through the block embedding `C = diag(A, B)`, `L = [[0, K], [0, 0]]`:
/// `Tr (C^{q/2} L* C^p L C^{q/2})^s`.
pub fn psi_block_embedding(
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    k: &ComplexMatrix,
    pt: ParamPoint,
) -> Result<f64> {
    let (n, m) = (a.dim(), b.dim());
    if k.rows() != n || k.cols() != m {
        return Err(Error::mismatch(
            "block embedding K",
            format!("{n}x{m}"),
            format!("{}x{}", k.rows(), k.cols()),
        ));
    }
    let c = PositiveDefiniteMatrix::new(HermitianMatrix::new(
        a.as_matrix().direct_sum(b.as_matrix()),
    )?)?;
    let l = ComplexMatrix::from_fn(n + m, n + m, |i, j| {
        if i < n && j >= n {
            k[(i, j - n)]
        } else {
            crate::matrix::c64(0.0, 0.0)
        }
    });
    psi_on_spectra(c.spectrum(), c.spectrum(), &l, pt)
}

/// `Υ_{p,s}(A) = Tr (K* A^p K)^s`.
pub fn upsilon(a: &PositiveDefiniteMatrix, k: &ComplexMatrix, p: f64, s: f64) -> Result<f64> {
    check_point(ParamPoint::new(p, 0.0, s))?;
    if k.rows() != a.dim() {
        return Err(Error::mismatch("K rows must match A", a.dim(), k.rows()));
    }
    let m = k.adjoint().matmul(&a.pow(p).as_matrix().matmul(k)?)?;
    trace_power(&HermitianMatrix::symmetrize(&m)?, s)
}

/// `Tr (1 + t M^{-1/(p+q)})^{-1}` with `M = B^{q/2} K* A^p K B^{q/2}`.
///
/// Jointly concave in `(A, B)` for `0 <= p, q <= 1`.
pub fn hiai_functional(
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    k: &ComplexMatrix,
    p: f64,
    q: f64,
    t: f64,
) -> Result<f64> {
    if !((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q) && p + q > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= p, q <= 1 and p + q > 0, got p={p} q={q}"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t must be positive, got {t}"
        )));
    }
    let m = inner(&a.pow(p), &b.pow(q / 2.0), k)?;
    let e = -1.0 / (p + q);
    let spec = m.eig()?;
    let values = spec.map_checked(
        |l| 1.0 / (1.0 + t * l.powf(e)),
        Domain::Positive,
        "inverse power of the inner matrix",
    );
    match values {
        Ok(h) => Ok(h.trace()),
        Err(_) => Err(Error::SingularInner {
            min_eigenvalue: spec.min(),
            power: e,
        }),
    }
}

fn check_point(pt: ParamPoint) -> Result<()> {
    if !pt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite exponents {pt:?}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c64, random_positive_definite, tensor, DensityMatrix};

    fn pd(d: &[f64]) -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::from_real_diagonal(d).unwrap()
    }

    #[test]
    fn identities_give_dimension() {
        let i = PositiveDefiniteMatrix::identity(3);
        let k = ComplexMatrix::identity(3);
        for pt in [
            ParamPoint::new(0.3, 0.2, 1.7),
            ParamPoint::new(-1.0, 2.0, -0.5),
        ] {
            assert!((psi(&i, &i, &k, pt).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn commuting_case() {
        let v = psi(
            &pd(&[1.0, 2.0]),
            &pd(&[1.0, 3.0]),
            &ComplexMatrix::identity(2),
            ParamPoint::new(1.0, 1.0, 0.5),
        )
        .unwrap();
        assert!((v - (1.0 + 6f64.sqrt())).abs() < 1e-12);
        assert!((v - 3.449490).abs() < 1e-6);
    }

    #[test]
    fn cyclicity_at_one_minus_one() {
        let a = random_positive_definite(3, (0.2, 3.0), 1).unwrap();
        let b = random_positive_definite(3, (0.2, 3.0), 2).unwrap();
        let v = psi(
            &a,
            &b,
            &ComplexMatrix::identity(3),
            ParamPoint::new(1.0, -1.0, 1.0),
        )
        .unwrap();
        let direct = a
            .as_matrix()
            .matmul(b.inverse().as_matrix())
            .unwrap()
            .trace()
            .re;
        assert!((v - direct).abs() < 1e-9);
    }

    #[test]
    fn upsilon_matches_psi_and_diagonal() {
        let a = random_positive_definite(3, (0.2, 3.0), 3).unwrap();
        let k = crate::matrix::ginibre(3, 3, &mut crate::rng::rng_from_seed(4));
        let u = upsilon(&a, &k, 1.3, 0.7).unwrap();
        let i = PositiveDefiniteMatrix::identity(3);
        for q in [-0.7, 0.0, 2.0] {
            assert!((u - psi(&a, &i, &k, ParamPoint::new(1.3, q, 0.7)).unwrap()).abs() < 1e-10);
        }
        let d = upsilon(&pd(&[2.0, 5.0]), &ComplexMatrix::identity(2), 1.5, 0.6).unwrap();
        assert!((d - (2f64.powf(0.9) + 5f64.powf(0.9))).abs() < 1e-12);
        let lin = upsilon(&a, &k, 1.0, 1.0).unwrap();
        let direct = k
            .adjoint()
            .matmul(&a.as_matrix().matmul(&k).unwrap())
            .unwrap()
            .trace()
            .re;
        assert!((lin - direct).abs() < 1e-10);
    }

    #[test]
    fn upsilon_inverse_consistency() {
        let a = random_positive_definite(3, (0.2, 3.0), 5).unwrap();
        let k = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                c64(2.0, 0.0)
            } else {
                c64(0.3 * i as f64, -0.2 * j as f64)
            }
        });
        let kinv_star = k.inverse().unwrap().adjoint();
        let ainv = PositiveDefiniteMatrix::new(a.inverse()).unwrap();
        let lhs = upsilon(&a, &k, 0.8, 1.4).unwrap();
        // Tr(K^{-1} A^{-p} K^{-*})^{-s} = Upsilon of A^{-1} with K^{-*} and exponent -s.
        let rhs = upsilon(&ainv, &kinv_star, 0.8, -1.4).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs());
    }

    #[test]
    fn block_embedding_agrees() {
        let a = random_positive_definite(2, (0.3, 2.0), 6).unwrap();
        let b = random_positive_definite(2, (0.3, 2.0), 7).unwrap();
        let k = crate::matrix::ginibre(2, 2, &mut crate::rng::rng_from_seed(8));
        for pt in [
            ParamPoint::new(0.5, 0.3, 1.0),
            ParamPoint::new(1.5, -0.5, 1.2),
            ParamPoint::new(-0.4, -0.6, 2.0),
        ] {
            let direct = psi(&a, &b, &k, pt).unwrap();
            let block = psi_block_embedding(&a, &b, &k, pt).unwrap();
            assert!(
                (direct - block).abs() < 1e-10 * direct.abs().max(1.0),
                "{pt:?}: {direct} vs {block}"
            );
        }
    }

    #[test]
    fn tensor_with_rank_one() {
        let rho = crate::matrix::random_density(2, 2, 9).unwrap();
        let sigma = crate::matrix::random_density(2, 2, 10).unwrap();
        let tau = DensityMatrix::basis_projector(2, 0);
        let pt = ParamPoint::from_alpha_z(1.5, 0.75).unwrap();
        let i2 = ComplexMatrix::identity(2);
        let base = psi_on_spectra(rho.spectrum(), sigma.spectrum(), &i2, pt).unwrap();
        let rt = DensityMatrix::new_allow_singular(
            HermitianMatrix::new(tensor(rho.as_matrix(), tau.as_matrix())).unwrap(),
        )
        .unwrap();
        let st = DensityMatrix::new_allow_singular(
            HermitianMatrix::new(tensor(sigma.as_matrix(), tau.as_matrix())).unwrap(),
        )
        .unwrap();
        let lifted = psi_on_spectra(
            rt.spectrum(),
            st.spectrum(),
            &ComplexMatrix::identity(4),
            pt,
        )
        .unwrap();
        assert!((base - lifted).abs() < 1e-9);
    }

    #[test]
    fn hiai_cases() {
        let i = PositiveDefiniteMatrix::identity(3);
        let k = ComplexMatrix::identity(3);
        assert!((hiai_functional(&i, &i, &k, 0.5, 0.5, 1.0).unwrap() - 1.5).abs() < 1e-12);
        assert!((hiai_functional(&i, &i, &k, 0.5, 0.5, 1e-12).unwrap() - 3.0).abs() < 1e-9);
        let (a, b) = (pd(&[0.5, 2.0, 3.0]), pd(&[1.5, 0.2, 4.0]));
        let (p, q, t) = (0.7, 0.3, 2.5);
        let expected: f64 = [(0.5, 1.5), (2.0, 0.2), (3.0, 4.0)]
            .iter()
            .map(|&(x, y): &(f64, f64)| {
                1.0 / (1.0 + t * (x.powf(p) * y.powf(q)).powf(-1.0 / (p + q)))
            })
            .sum();
        assert!((hiai_functional(&a, &b, &k, p, q, t).unwrap() - expected).abs() < 1e-12);
        let mut last = f64::INFINITY;
        for t in [0.01, 0.1, 1.0, 10.0] {
            let v = hiai_functional(&a, &b, &k, p, q, t).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(hiai_functional(&a, &b, &k, 1.5, 0.3, 1.0).is_err());
    }

    #[test]
    fn negative_outer_power_on_singular_inner_fails() {
        let a = PositiveDefiniteMatrix::identity(2);
        let k = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            psi(&a, &a, &k, ParamPoint::new(1.0, 1.0, -1.0)),
            Err(Error::SingularInner { .. })
        ));
        assert!((psi(&a, &a, &k, ParamPoint::new(1.0, 1.0, 0.5)).unwrap() - 1.0).abs() < 1e-12);
    }
}
