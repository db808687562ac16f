//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::{c64, ComplexMatrix, HermitianMatrix, Spectrum, UnitaryMatrix, C64};
use crate::error::{Error, Result};
use crate::tolerance::tolerances;

/// Eigendecomposition `M = V diag(λ) V*` with eigenvalues in ascending order.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// a real Jacobi rotation in the `(p, q)` plane. Sweeps stop once the
/// off-diagonal Frobenius norm drops below `jacobi_off_diagonal * ||M||_F`.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<Spectrum> {
    let tol = tolerances();
    let n = m.dim();
    let mut a: Vec<C64> = m.as_matrix().as_slice().to_vec();
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut v = ComplexMatrix::identity(n).as_slice().to_vec();
    let norm = m.as_matrix().frobenius_norm();
    let threshold = tol.jacobi_off_diagonal * norm;

    let off_norm = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut off = off_norm(&a);
    while off > threshold {
        if sweeps == tol.jacobi_max_sweeps {
            return Err(Error::EigenNoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Negligible pivot relative to both diagonal entries: zero it.
                if mag < 1e-18 * (app.abs() + aqq.abs()) && sweeps > 3 {
                    a[p * n + q] = c64(0.0, 0.0);
                    a[q * n + p] = c64(0.0, 0.0);
                    continue;
                }
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Plane rotation U = diag(1, conj(phase)) * [[c, s], [-s, c]].
                let u11 = c64(c, 0.0);
                let u12 = c64(s, 0.0);
                let u21 = -phase.conj() * s;
                let u22 = phase.conj() * c;

                // A <- A U (columns p, q).
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * u11 + akq * u21;
                    a[k * n + q] = akp * u12 + akq * u22;
                }
                // A <- U* A (rows p, q).
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = u11.conj() * apk + u21.conj() * aqk;
                    a[q * n + k] = u12.conj() * apk + u22.conj() * aqk;
                }
                a[p * n + q] = c64(0.0, 0.0);
                a[q * n + p] = c64(0.0, 0.0);
                a[p * n + p] = c64(a[p * n + p].re, 0.0);
                a[q * n + q] = c64(a[q * n + q].re, 0.0);
                // V <- V U.
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * u11 + vkq * u21;
                    v[k * n + q] = vkp * u12 + vkq * u22;
                }
            }
        }
        off = off_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    Ok(Spectrum::from_parts_unchecked(
        eigenvalues,
        UnitaryMatrix::from_trusted(vectors),
    ))
}
