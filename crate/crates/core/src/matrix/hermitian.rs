use serde::Serialize;

use super::{c64, eig_hermitian, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tolerance::tolerances;

/// Which eigenvalues a spectral function accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Any real eigenvalue.
    Real,
    /// Eigenvalues `>= -floor`; small negative rounding is clamped to zero.
    NonNegative,
    /// Eigenvalues `>= floor` (negative powers, logarithms).
    Positive,
}

/// A complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermitianMatrix {
    m: ComplexMatrix,
}

impl HermitianMatrix {
    /// Validates `M ≈ M*` (entrywise, relative to the largest entry) and
    /// stores the exact Hermitian part `(M + M*) / 2`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::mismatch(
                "HermitianMatrix",
                "square",
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = m.hermitian_defect();
        if deviation > tolerances().hermitian * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            m: m.hermitian_part(),
        })
    }

    /// Hermitian part of a computed product whose asymmetry is pure rounding.
    pub fn symmetrize(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::mismatch(
                "HermitianMatrix::symmetrize",
                "square",
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            m: m.hermitian_part(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: ComplexMatrix::identity(n),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self {
            m: ComplexMatrix::from_real_diagonal(diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn eig(&self) -> Result<Spectrum> {
        eig_hermitian(self)
    }

    /// `V diag(f(λ)) V*` after checking every eigenvalue against `domain`.
    pub fn map(&self, f: impl Fn(f64) -> f64, domain: Domain) -> Result<HermitianMatrix> {
        self.eig()?.map_checked(f, domain, "spectral function")
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            m: self.m.scale(factor),
        }
    }

    /// `(1 - theta) * self + theta * other`.
    pub fn interpolate(&self, other: &Self, theta: f64) -> Self {
        Self {
            m: &self.m.scale(1.0 - theta) + &other.m.scale(theta),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: &self.m + &other.m,
        }
    }

    /// `U self U*`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::symmetrize(&u.matmul(&self.m)?.matmul(&u.adjoint())?)
    }
}

/// `matrix_function(M, f)`: spectral calculus with a domain check.
pub fn matrix_function(
    m: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
    domain: Domain,
) -> Result<HermitianMatrix> {
    m.map(f, domain)
}

/// A unitary matrix (`U U* = I` within the unitary tolerance).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitaryMatrix {
    m: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::mismatch(
                "UnitaryMatrix",
                "square",
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let u = Self { m };
        let defect = u.defect();
        if defect > tolerances().unitary {
            return Err(Error::NotUnitary { defect });
        }
        Ok(u)
    }

    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: ComplexMatrix::identity(n),
        }
    }

    /// `||U U* - I||_F`.
    pub fn defect(&self) -> f64 {
        (&self.m * &self.m.adjoint()).distance(&ComplexMatrix::identity(self.m.rows()))
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }
}

/// Eigenvalues (ascending) with the unitary whose columns are the eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: UnitaryMatrix,
}

impl Spectrum {
    pub(crate) fn from_parts_unchecked(eigenvalues: Vec<f64>, eigenvectors: UnitaryMatrix) -> Self {
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &UnitaryMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// `V diag(values) V*`.
    pub fn synthesize(&self, values: &[f64]) -> HermitianMatrix {
        let v = self.eigenvectors.as_matrix();
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in values.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        HermitianMatrix {
            m: out.hermitian_part(),
        }
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.synthesize(&self.eigenvalues).into_matrix()
    }

    /// Applies `f` after checking the spectrum against `domain`.
    pub fn map_checked(
        &self,
        f: impl Fn(f64) -> f64,
        domain: Domain,
        what: &str,
    ) -> Result<HermitianMatrix> {
        let floor = tolerances().eigenvalue_floor;
        let mut values = Vec::with_capacity(self.dim());
        for &l in &self.eigenvalues {
            let x = match domain {
                Domain::Real => l,
                Domain::NonNegative if l >= -floor => l.max(0.0),
                Domain::Positive if l >= floor => l,
                _ => {
                    return Err(Error::Domain {
                        eigenvalue: l,
                        function: what.to_string(),
                    })
                }
            };
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::Domain {
                    eigenvalue: l,
                    function: what.to_string(),
                });
            }
            values.push(y);
        }
        Ok(self.synthesize(&values))
    }

    /// Threshold below which an eigenvalue is treated as zero by the support
    /// convention: the floor, scaled by the largest eigenvalue when that exceeds 1.
    pub fn support_threshold(&self) -> f64 {
        tolerances().eigenvalue_floor * self.max().abs().max(1.0)
    }

    /// Eigenvalues mapped by `x ↦ x^p` on the support and to 0 on the kernel.
    pub fn support_power_values(&self, p: f64) -> Vec<f64> {
        let cut = self.support_threshold();
        self.eigenvalues
            .iter()
            .map(|&l| if l > cut { l.powf(p) } else { 0.0 })
            .collect()
    }

    /// `M^p` restricted to the support of `M` (zero on the kernel), for PSD `M`.
    pub fn support_power(&self, p: f64) -> HermitianMatrix {
        self.synthesize(&self.support_power_values(p))
    }

    /// `log M` on the support of `M`, zero on the kernel.
    pub fn support_log(&self) -> HermitianMatrix {
        let cut = self.support_threshold();
        let values: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l > cut { l.ln() } else { 0.0 })
            .collect();
        self.synthesize(&values)
    }

    /// Number of eigenvalues above the support threshold.
    pub fn rank(&self) -> usize {
        let cut = self.support_threshold();
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }
}

/// A positive definite matrix with its cached spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveDefiniteMatrix {
    h: HermitianMatrix,
    spectrum: Spectrum,
}

impl PositiveDefiniteMatrix {
    /// Fails unless every eigenvalue is at least the eigenvalue floor.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let spectrum = h.eig()?;
        let floor = tolerances().eigenvalue_floor;
        if spectrum.min().is_nan() || spectrum.min() < floor {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: spectrum.min(),
                floor,
            });
        }
        Ok(Self { h, spectrum })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(HermitianMatrix::identity(n)).expect("identity is positive definite")
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.h.as_matrix()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min()
    }

    /// `A^p` for any real `p`.
    pub fn pow(&self, p: f64) -> HermitianMatrix {
        let values: Vec<f64> = self
            .spectrum
            .eigenvalues()
            .iter()
            .map(|l| l.powf(p))
            .collect();
        self.spectrum.synthesize(&values)
    }

    pub fn log(&self) -> HermitianMatrix {
        let values: Vec<f64> = self.spectrum.eigenvalues().iter().map(|l| l.ln()).collect();
        self.spectrum.synthesize(&values)
    }

    pub fn inverse(&self) -> HermitianMatrix {
        self.pow(-1.0)
    }

    /// `(1 - theta) * self + theta * other`, which stays positive definite.
    pub fn interpolate(&self, other: &Self, theta: f64) -> Result<Self> {
        Self::new(self.h.interpolate(&other.h, theta))
    }

    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(self.h.conjugate_by(u)?)
    }
}

/// A density matrix: positive semidefinite with unit trace.
///
/// [`DensityMatrix::new`] demands full rank; [`DensityMatrix::new_allow_singular`]
/// accepts a kernel (eigenvalues down to `-floor`, treated as zero).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    h: HermitianMatrix,
    spectrum: Spectrum,
}

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let rho = Self::new_allow_singular(h)?;
        let floor = tolerances().eigenvalue_floor;
        if rho.spectrum.min() < floor {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: rho.spectrum.min(),
                floor,
            });
        }
        Ok(rho)
    }

    pub fn new_allow_singular(h: HermitianMatrix) -> Result<Self> {
        let tol = tolerances();
        let tr = h.trace();
        if (tr - 1.0).abs() > tol.density_trace * (h.dim() as f64).max(1.0) {
            return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
        }
        let spectrum = h.eig()?;
        if spectrum.min() < -tol.eigenvalue_floor {
            return Err(Error::NotDensity(format!(
                "negative eigenvalue {}",
                spectrum.min()
            )));
        }
        Ok(Self { h, spectrum })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::new(HermitianMatrix::identity(n).scale(1.0 / n as f64))
            .expect("I/n is a density matrix")
    }

    /// `|k><k|` in dimension `n`.
    pub fn basis_projector(n: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(k, k)] = c64(1.0, 0.0);
        Self::new_allow_singular(HermitianMatrix { m }).expect("projector is a state")
    }

    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::new_allow_singular(HermitianMatrix::from_real_diagonal(p))
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.h.as_matrix()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn trace(&self) -> f64 {
        self.h.trace()
    }

    pub fn is_full_rank(&self) -> bool {
        self.spectrum.min() >= tolerances().eigenvalue_floor
    }

    /// `rho^p` on the support (zero on the kernel).
    pub fn support_power(&self, p: f64) -> HermitianMatrix {
        self.spectrum.support_power(p)
    }

    pub fn to_positive_definite(&self) -> Result<PositiveDefiniteMatrix> {
        let floor = tolerances().eigenvalue_floor;
        if self.spectrum.min() < floor {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: self.spectrum.min(),
                floor,
            });
        }
        Ok(PositiveDefiniteMatrix {
            h: self.h.clone(),
            spectrum: self.spectrum.clone(),
        })
    }

    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new_allow_singular(self.h.conjugate_by(u)?)
    }

    /// `(1 - theta) * self + theta * other`.
    pub fn mix(&self, other: &Self, theta: f64) -> Result<Self> {
        Self::new_allow_singular(self.h.interpolate(&other.h, theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_hermitian, random_positive_definite};

    #[test]
    fn sqrt_of_diagonal() {
        let m = HermitianMatrix::from_real_diagonal(&[4.0, 9.0]);
        let r = matrix_function(&m, f64::sqrt, Domain::NonNegative).unwrap();
        assert!(
            r.as_matrix()
                .distance(&ComplexMatrix::from_real_diagonal(&[2.0, 3.0]))
                < 1e-14
        );
    }

    #[test]
    fn function_of_identity() {
        let r = matrix_function(
            &HermitianMatrix::identity(4),
            |x| x.exp() + 2.0,
            Domain::Real,
        )
        .unwrap();
        let expected = ComplexMatrix::identity(4).scale(1f64.exp() + 2.0);
        assert!(r.as_matrix().distance(&expected) < 1e-14);
    }

    #[test]
    fn exp_log_round_trip() {
        for seed in 0..10 {
            let h = random_positive_definite(4, (0.1, 10.0), seed).unwrap();
            let e = matrix_function(h.as_hermitian(), f64::exp, Domain::Real).unwrap();
            let back = matrix_function(&e, f64::ln, Domain::Positive).unwrap();
            assert!(back.as_matrix().distance(h.as_matrix()) < 1e-8);
        }
    }

    #[test]
    fn result_commutes_with_input() {
        let h = random_hermitian(5, 4);
        let f = matrix_function(&h, |x| x.powi(3) - x.sin(), Domain::Real).unwrap();
        let comm = h.as_matrix().commutator(f.as_matrix()).unwrap();
        assert!(comm.frobenius_norm() < 1e-9);
    }

    #[test]
    fn log_domain_violation() {
        let h = HermitianMatrix::from_real_diagonal(&[1.0, -0.5]);
        assert!(matches!(
            matrix_function(&h, f64::ln, Domain::Positive),
            Err(Error::Domain { .. })
        ));
        let tiny = HermitianMatrix::from_real_diagonal(&[1.0, 1e-12]);
        assert!(matrix_function(&tiny, |x| x.powf(-0.5), Domain::Positive).is_err());
    }

    #[test]
    fn positive_definite_rejects_rather_than_clips() {
        let h = HermitianMatrix::from_real_diagonal(&[1.0, 1e-11]);
        assert!(matches!(
            PositiveDefiniteMatrix::new(h),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn hermitian_check() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
        let nearly = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0 + 1e-14, 1.0]]).unwrap();
        let h = HermitianMatrix::new(nearly).unwrap();
        assert_eq!(h.as_matrix().hermitian_defect(), 0.0);
    }

    #[test]
    fn power_law() {
        let a = random_positive_definite(4, (0.2, 5.0), 9).unwrap();
        for (p, q) in [(0.5, 0.5), (-1.0, 2.0), (1.5, -0.7), (-0.3, -0.9)] {
            let lhs = a.pow(p).as_matrix() * a.pow(q).as_matrix();
            assert!(lhs.distance(a.pow(p + q).as_matrix()) < 1e-8, "p={p} q={q}");
        }
    }

    #[test]
    fn density_checks() {
        assert!(DensityMatrix::new(HermitianMatrix::from_real_diagonal(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(HermitianMatrix::from_real_diagonal(&[1.0, 0.0])).is_err());
        let pure =
            DensityMatrix::new_allow_singular(HermitianMatrix::from_real_diagonal(&[1.0, 0.0]))
                .unwrap();
        assert!(!pure.is_full_rank());
        assert!(
            DensityMatrix::new_allow_singular(HermitianMatrix::from_real_diagonal(&[1.1, -0.1]))
                .is_err()
        );
    }

    #[test]
    fn support_power_zero_on_kernel() {
        let rho = DensityMatrix::basis_projector(3, 1);
        let p = rho.support_power(-0.5);
        assert_eq!(p.as_matrix(), rho.as_matrix());
    }
}
