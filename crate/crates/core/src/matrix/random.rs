//! Seeded random matrix ensembles.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::{
    c64, ComplexMatrix, DensityMatrix, HermitianMatrix, PositiveDefiniteMatrix, UnitaryMatrix, C64,
};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Complex Ginibre matrix: i.i.d. entries `(x + iy)/√2` with `x, y ~ N(0, 1)`.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c64(re * scale, im * scale)
    })
}

/// Haar-distributed unitary: Gram-Schmidt on the columns of a Ginibre
/// matrix. Gram-Schmidt leaves the triangular factor with a positive real
/// diagonal, which is the phase normalisation that makes the result Haar.
pub fn random_haar_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let g = ginibre(dim, dim, rng);
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|c| (0..dim).map(|r| g[(r, c)]).collect())
        .collect();
    for k in 0..dim {
        // Two passes of modified Gram-Schmidt keep the columns orthogonal to
        // machine precision.
        for _ in 0..2 {
            for j in 0..k {
                let (done, rest) = cols.split_at_mut(k);
                let qj = &done[j];
                let proj: C64 = qj
                    .iter()
                    .zip(rest[0].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for (x, q) in rest[0].iter_mut().zip(qj) {
                    *x -= proj * q;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    UnitaryMatrix::from_trusted(ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r]))
}

pub fn random_haar_unitary(dim: usize, seed: u64) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(random_haar_unitary_with(dim, &mut rng_from_seed(seed)))
}

/// GUE sample `(G + G*) / 2`.
pub fn random_hermitian_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(dim, dim, rng);
    HermitianMatrix::symmetrize(&g).expect("Ginibre sample is square and finite")
}

pub fn random_hermitian(dim: usize, seed: u64) -> HermitianMatrix {
    random_hermitian_with(dim, &mut rng_from_seed(seed))
}

/// Normalised Wishart state `G G* / tr(G G*)` with `G` a `dim x rank` Ginibre matrix.
pub fn random_density_with<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= rank <= dim, got rank {rank}, dim {dim}"
        )));
    }
    let g = ginibre(dim, rank, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    let h = HermitianMatrix::symmetrize(&w.scale(1.0 / tr))?;
    if rank == dim {
        // Full-rank Wishart samples are almost surely positive definite, but a
        // draw can still sit below the floor; fall back to the singular form.
        DensityMatrix::new(h.clone()).or_else(|_| DensityMatrix::new_allow_singular(h))
    } else {
        DensityMatrix::new_allow_singular(h)
    }
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dim, rank, &mut rng_from_seed(seed))
}

/// `U diag(λ) U*` with Haar `U` and eigenvalues uniform on `range`.
pub fn random_positive_definite_with<R: Rng + ?Sized>(
    dim: usize,
    range: (f64, f64),
    rng: &mut R,
) -> Result<PositiveDefiniteMatrix> {
    let (lo, hi) = range;
    if dim == 0 || !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "spectrum range must satisfy 0 < lo <= hi < inf, got {range:?}"
        )));
    }
    let u = random_haar_unitary_with(dim, rng);
    let dist =
        Uniform::new_inclusive(lo, hi).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let diag: Vec<f64> = (0..dim).map(|_| dist.sample(rng)).collect();
    let d = ComplexMatrix::from_real_diagonal(&diag);
    let m = &(u.as_matrix() * &d) * &u.as_matrix().adjoint();
    PositiveDefiniteMatrix::new(HermitianMatrix::symmetrize(&m)?)
}

pub fn random_positive_definite(
    dim: usize,
    range: (f64, f64),
    seed: u64,
) -> Result<PositiveDefiniteMatrix> {
    random_positive_definite_with(dim, range, &mut rng_from_seed(seed))
}
