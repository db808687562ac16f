use serde::{Deserialize, Serialize};

use super::classical::{validate_test, HypothesisTestResult, SteinRow, TestMethod, COVERAGE_SLACK};
use crate::divergences::umegaki;
use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, ExecMode};
use crate::matrix::{c64, ComplexMatrix, DensityMatrix, HermitianMatrix, C64};

/// Largest total dimension `dim^N` accepted.
pub const MAX_TOTAL_DIM: usize = 4096;
const GRID_POINTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantumRoute {
    /// Schur-Weyl blocks for qubits, dense tensor powers otherwise.
    #[default]
    Auto,
    Dense,
}

/// `ρ^⊗N` and `σ^⊗N` restricted to a common invariant block, repeated `multiplicity` times.
struct Block {
    rho: HermitianMatrix,
    sigma: HermitianMatrix,
    multiplicity: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `X^⊗m` on the symmetric subspace of `(C^2)^⊗m`, in the orthonormal Dicke basis.
fn symmetric_power(x: &ComplexMatrix, m: usize) -> ComplexMatrix {
    let (a, b, c, d) = (x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)]);
    // Coefficients of x^{m-i} y^i in (a x + c y)^{m-j} (b x + d y)^j.
    let mul = |p: &[C64], lin: (C64, C64)| -> Vec<C64> {
        let mut out = vec![c64(0.0, 0.0); p.len() + 1];
        for (i, &v) in p.iter().enumerate() {
            out[i] += v * lin.0;
            out[i + 1] += v * lin.1;
        }
        out
    };
    ComplexMatrix::from_fn(m + 1, m + 1, |i, j| {
        let mut poly = vec![c64(1.0, 0.0)];
        for _ in 0..m - j {
            poly = mul(&poly, (a, c));
        }
        for _ in 0..j {
            poly = mul(&poly, (b, d));
        }
        poly[i] * (binomial(m, j) / binomial(m, i)).sqrt()
    })
}

fn det2(x: &ComplexMatrix) -> f64 {
    (x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)]).re
}

/// Schur-Weyl blocks of the N-fold tensor powers of two qubit states: the
/// irreducible pieces `det^k ⊗ Sym^{N-2k}` with multiplicity `C(N,k) - C(N,k-1)`.
fn schur_weyl_blocks(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize) -> Result<Vec<Block>> {
    let (dr, ds) = (det2(rho.as_matrix()), det2(sigma.as_matrix()));
    (0..=n / 2)
        .map(|k| {
            let m = n - 2 * k;
            let mult = binomial(n, k) - if k > 0 { binomial(n, k - 1) } else { 0.0 };
            Ok(Block {
                rho: HermitianMatrix::symmetrize(
                    &symmetric_power(rho.as_matrix(), m).scale(dr.powi(k as i32)),
                )?,
                sigma: HermitianMatrix::symmetrize(
                    &symmetric_power(sigma.as_matrix(), m).scale(ds.powi(k as i32)),
                )?,
                multiplicity: mult,
            })
        })
        .collect()
}

fn tensor_power(x: &ComplexMatrix, n: usize) -> ComplexMatrix {
    (1..n).fold(x.clone(), |acc, _| acc.kron(x))
}

fn dense_blocks(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize) -> Result<Vec<Block>> {
    Ok(vec![Block {
        rho: HermitianMatrix::symmetrize(&tensor_power(rho.as_matrix(), n))?,
        sigma: HermitianMatrix::symmetrize(&tensor_power(sigma.as_matrix(), n))?,
        multiplicity: 1.0,
    }])
}

/// `(Tr ρ^⊗N P_t, Tr σ^⊗N P_t)` for the projection onto the positive part of `ρ^⊗N - t σ^⊗N`.
fn masses(blocks: &[Block], t: f64) -> Result<(f64, f64)> {
    let (mut r, mut s) = (0.0, 0.0);
    for b in blocks {
        let delta = b.rho.add(&b.sigma.scale(-t));
        let spec = delta.eig()?;
        let vecs = spec.eigenvectors().as_matrix();
        let dim = b.rho.dim();
        for (col, &lambda) in spec.eigenvalues().iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            let v: Vec<C64> = (0..dim).map(|i| vecs[(i, col)]).collect();
            r += b.multiplicity * quad_form(b.rho.as_matrix(), &v);
            s += b.multiplicity * quad_form(b.sigma.as_matrix(), &v);
        }
    }
    Ok((r, s))
}

fn quad_form(m: &ComplexMatrix, v: &[C64]) -> f64 {
    let n = v.len();
    let mut acc = c64(0.0, 0.0);
    for i in 0..n {
        let mut row = c64(0.0, 0.0);
        for j in 0..n {
            row += m[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}

/// Best Neyman-Pearson projection `P_t` meeting `Tr ρ^⊗N P_t >= 1 - ε`.
///
/// This is an upper bound on the optimal type-II error within projective
/// tests, not a certified optimum.
pub fn quantum_beta_np_family(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    epsilon: f64,
    n: usize,
) -> Result<HypothesisTestResult> {
    quantum_beta_with_route(rho, sigma, epsilon, n, QuantumRoute::Auto)
}

pub fn quantum_beta_with_route(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    epsilon: f64,
    n: usize,
    route: QuantumRoute,
) -> Result<HypothesisTestResult> {
    validate_test(n, epsilon)?;
    let dim = rho.dim();
    if sigma.dim() != dim {
        return Err(Error::mismatch("hypothesis states", dim, sigma.dim()));
    }
    let total = (dim as f64).powi(n as i32);
    if total > MAX_TOTAL_DIM as f64 {
        return Err(Error::InvalidParameter(format!(
            "total dimension {dim}^{n} exceeds {MAX_TOTAL_DIM}"
        )));
    }
    if !rho.is_full_rank() || !sigma.is_full_rank() {
        return Err(Error::InvalidParameter(
            "projection family needs full-rank states".into(),
        ));
    }
    let blocks = if dim == 2 && route == QuantumRoute::Auto {
        schur_weyl_blocks(rho, sigma, n)?
    } else {
        dense_blocks(rho, sigma, n)?
    };

    // Geometric grid over the range of eigenvalue ratios, padded so the
    // ends are all-accept and all-reject.
    let (rs, ss) = (rho.spectrum(), sigma.spectrum());
    let nf = n as f64;
    let lo = nf * (rs.min() / ss.max()).ln() - 1.0;
    let hi = nf * (rs.max() / ss.min()).ln() + 1.0;
    let target = 1.0 - epsilon - COVERAGE_SLACK;
    let grid = |a: f64, b: f64| -> Vec<f64> {
        (0..GRID_POINTS)
            .map(|i| a + (b - a) * i as f64 / (GRID_POINTS - 1) as f64)
            .collect()
    };

    let mut best: Option<(f64, f64)> = None;
    let mut scan = |log_ts: &[f64]| -> Result<Option<usize>> {
        let mut last_ok = None;
        for (i, &lt) in log_ts.iter().enumerate() {
            let (r, s) = masses(&blocks, lt.exp())?;
            if r >= target {
                last_ok = Some(i);
                if best.is_none_or(|(_, bs)| s < bs) {
                    best = Some((lt, s));
                }
            }
        }
        Ok(last_ok)
    };
    let coarse = grid(lo, hi);
    let refine = match scan(&coarse)? {
        Some(i) if i + 1 < coarse.len() => grid(coarse[i], coarse[i + 1]),
        Some(_) => Vec::new(),
        None => grid(lo - 10.0, lo),
    };
    scan(&refine)?;
    let (log_t, s_mass) = best.ok_or_else(|| {
        Error::Numerical(format!(
            "no threshold on the refined grid reaches coverage {}",
            1.0 - epsilon
        ))
    })?;
    Ok(HypothesisTestResult::new(
        n,
        epsilon,
        s_mass.ln(),
        TestMethod::ProjectionFamily,
        format!("positive part of rho^N - t sigma^N with ln t = {log_t:.9}"),
    ))
}

/// Rates of the projection family for each `N`; the bounds use the Umegaki divergence.
pub fn quantum_rate_curve(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    epsilon: f64,
    ns: &[usize],
    mode: ExecMode,
) -> Result<Vec<SteinRow>> {
    let d = umegaki(rho, sigma)?.value;
    try_map_indexed(mode, ns.len(), |i| {
        let res = quantum_beta_np_family(rho, sigma, epsilon, ns[i])?;
        Ok(SteinRow {
            n: ns[i],
            epsilon,
            log_beta: res.log_beta,
            rate: res.rate,
            bound_low: d,
            bound_high: d / (1.0 - epsilon),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::ClassicalDistribution;
    use crate::matrix::random_density;
    use crate::stein::classical_threshold_beta;

    fn smoothed_plus(w: f64) -> DensityMatrix {
        let h = 0.5 * w;
        let m = ComplexMatrix::from_real_rows(&[&[0.5, h], &[h, 0.5]]).unwrap();
        DensityMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn schur_weyl_dimensions_and_traces() {
        let rho = random_density(2, 2, 4).unwrap();
        let sigma = random_density(2, 2, 5).unwrap();
        for n in 1..=6 {
            let blocks = schur_weyl_blocks(&rho, &sigma, n).unwrap();
            let dim: f64 = blocks
                .iter()
                .map(|b| b.multiplicity * b.rho.dim() as f64)
                .sum();
            assert_eq!(dim, (1u64 << n) as f64);
            let tr: f64 = blocks.iter().map(|b| b.multiplicity * b.rho.trace()).sum();
            assert!((tr - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schur_weyl_matches_dense() {
        let rho = random_density(2, 2, 8).unwrap();
        let sigma = random_density(2, 2, 9).unwrap();
        for n in [2, 3, 4] {
            let sw = schur_weyl_blocks(&rho, &sigma, n).unwrap();
            let dense = dense_blocks(&rho, &sigma, n).unwrap();
            for t in [0.3, 1.0, 2.5] {
                let (r1, s1) = masses(&sw, t).unwrap();
                let (r2, s2) = masses(&dense, t).unwrap();
                assert!(
                    (r1 - r2).abs() < 1e-10 && (s1 - s2).abs() < 1e-10,
                    "n={n} t={t}"
                );
            }
        }
    }

    #[test]
    fn commuting_case_reduces_to_types() {
        for (p, q, eps) in [
            (&[0.8, 0.2][..], &[0.3, 0.7][..], 0.1),
            (&[0.6, 0.4], &[0.25, 0.75], 0.05),
        ] {
            let rho = DensityMatrix::from_probabilities(p).unwrap();
            let sigma = DensityMatrix::from_probabilities(q).unwrap();
            let (r, s) = (
                ClassicalDistribution::new(p.to_vec()).unwrap(),
                ClassicalDistribution::new(q.to_vec()).unwrap(),
            );
            for n in 1..=8 {
                let qb = quantum_beta_np_family(&rho, &sigma, eps, n)
                    .unwrap()
                    .log_beta;
                let cb = classical_threshold_beta(&r, &s, eps, n).unwrap().log_beta;
                assert!((qb - cb).abs() < 1e-9, "n={n}: {qb} vs {cb}");
            }
        }
        let p = [0.5, 0.3, 0.2];
        let q = [0.2, 0.3, 0.5];
        let rho = DensityMatrix::from_probabilities(&p).unwrap();
        let sigma = DensityMatrix::from_probabilities(&q).unwrap();
        let (r, s) = (
            ClassicalDistribution::new(p.to_vec()).unwrap(),
            ClassicalDistribution::new(q.to_vec()).unwrap(),
        );
        for n in 1..=3 {
            let qb = quantum_beta_np_family(&rho, &sigma, 0.1, n)
                .unwrap()
                .log_beta;
            let cb = classical_threshold_beta(&r, &s, 0.1, n).unwrap().log_beta;
            assert!((qb - cb).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_states_have_small_rate() {
        let rho = smoothed_plus(0.6);
        for n in [2, 5, 8] {
            let res = quantum_beta_np_family(&rho, &rho, 0.1, n).unwrap();
            assert!(res.rate <= -(0.9f64 - 1e-9).ln() / n as f64 + 1e-9);
        }
    }

    #[test]
    fn non_commuting_qubit_rates() {
        let rho = smoothed_plus(0.95);
        let sigma = DensityMatrix::from_probabilities(&[0.7, 0.3]).unwrap();
        let d = umegaki(&rho, &sigma).unwrap().value;
        let rows = quantum_rate_curve(
            &rho,
            &sigma,
            0.1,
            &[2, 3, 4, 5, 6, 7, 8],
            ExecMode::default(),
        )
        .unwrap();
        let last = rows.last().unwrap().rate;
        assert!((last - d).abs() <= 0.35 * d, "rate {last} vs D {d}");
        // Lattice effects make the sequence oscillate at tiny N; the distance
        // to D still shrinks on average.
        let dev: Vec<f64> = rows.iter().map(|r| (r.rate - d).abs()).collect();
        assert!(dev[dev.len() - 1] < dev[0]);
        let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 7.0, dev.iter().sum::<f64>() / 7.0);
        let slope: f64 = xs.iter().zip(&dev).map(|(x, y)| (x - mx) * (y - my)).sum();
        assert!(slope < 0.0);
    }

    #[test]
    fn rejects_oversized_and_singular() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(quantum_beta_np_family(&rho, &rho, 0.1, 13).is_err());
        let pure = DensityMatrix::basis_projector(2, 0);
        assert!(quantum_beta_np_family(&pure, &rho, 0.1, 2).is_err());
    }
}
