use serde::{Deserialize, Serialize};

use super::classify::Direction;
use super::probe::{joint_margin, JointFunctional, Witness};
use crate::error::{Error, Result};
use crate::matrix::{
    c64, random_positive_definite_with, ComplexMatrix, HermitianMatrix, MatrixFile,
    PositiveDefiniteMatrix,
};
use crate::rng::rng_for;
use crate::tolerance::tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub epsilons: Vec<f64>,
    /// Values for the diagonal entries `a, b`.
    pub grid: Vec<f64>,
    /// Random trials of the operator-level search (convex direction only).
    pub random_trials: usize,
    pub seed: u64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-2, 1e-3, 1e-4],
            grid: (-3..=1).map(|k| 10f64.powi(k)).collect(),
            random_trials: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub target: String,
    pub direction: Direction,
    /// Construction that produced the best candidate.
    pub construction: String,
    pub candidates: usize,
    /// Best margin seen; positive means the direction fails there.
    pub best_margin: f64,
    /// Best margin exceeds the certification threshold.
    pub found: bool,
    /// Found, and re-evaluating the serialized witness reproduces the margin.
    pub certified: bool,
    pub witness: Option<Witness>,
}

struct Candidate {
    margin: f64,
    construction: &'static str,
    witness: Witness,
}

fn pdm(m: ComplexMatrix) -> Result<PositiveDefiniteMatrix> {
    PositiveDefiniteMatrix::new(HermitianMatrix::new(m)?)
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    f: JointFunctional,
    direction: Direction,
    a0: &PositiveDefiniteMatrix,
    a1: &PositiveDefiniteMatrix,
    b0: &PositiveDefiniteMatrix,
    b1: &PositiveDefiniteMatrix,
    k: &ComplexMatrix,
    construction: &'static str,
) -> Result<Candidate> {
    let m = joint_margin(&f, direction, 0.5, a0, a1, b0, b1, k)?;
    Ok(Candidate {
        margin: m.margin,
        construction,
        witness: Witness::Joint {
            functional: f,
            direction,
            theta: 0.5,
            a0: MatrixFile::from_matrix(a0.as_matrix()),
            a1: MatrixFile::from_matrix(a1.as_matrix()),
            b0: MatrixFile::from_matrix(b0.as_matrix()),
            b1: MatrixFile::from_matrix(b1.as_matrix()),
            k: MatrixFile::from_matrix(k),
            margin: m.margin,
        },
    })
}

fn keep_best(best: &mut Option<Candidate>, c: Candidate) {
    if best.as_ref().is_none_or(|b| c.margin > b.margin) {
        *best = Some(c);
    }
}

fn finish(
    target: String,
    direction: Direction,
    candidates: usize,
    best: Option<Candidate>,
) -> Result<CounterexampleReport> {
    let threshold = tolerances().counterexample_margin;
    let Some(best) = best else {
        return Err(Error::InvalidParameter("empty search grid".into()));
    };
    let found = best.margin > threshold;
    let certified = found && {
        let again = best.witness.reevaluate()?;
        again > threshold && (again - best.margin).abs() <= 1e-12 * best.margin.abs().max(1.0)
    };
    Ok(CounterexampleReport {
        target,
        direction,
        construction: best.construction.to_string(),
        candidates,
        best_margin: best.margin,
        found,
        certified,
        witness: Some(best.witness),
    })
}

/// `A = diag(a, b)`, `K = [[1, 0], [1, ε]]`: `Υ_{p,s}` tends to `(a^p + b^p)^s` as `ε → 0`.
fn two_by_two_scan(
    p: f64,
    s: f64,
    direction: Direction,
    cfg: &CounterexampleConfig,
) -> Result<(usize, Option<Candidate>)> {
    let f = JointFunctional::Upsilon { p, s };
    let i2 = PositiveDefiniteMatrix::identity(2);
    let mut best = None;
    let mut n = 0;
    for &eps in &cfg.epsilons {
        let k = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[1.0, eps]])?;
        for &a0 in &cfg.grid {
            for &b0 in &cfg.grid {
                for &a1 in &cfg.grid {
                    for &b1 in &cfg.grid {
                        let x0 = PositiveDefiniteMatrix::from_real_diagonal(&[a0, b0])?;
                        let x1 = PositiveDefiniteMatrix::from_real_diagonal(&[a1, b1])?;
                        keep_best(
                            &mut best,
                            evaluate(
                                f,
                                direction,
                                &x0,
                                &x1,
                                &i2,
                                &i2,
                                &k,
                                "diag(a,b), K=[[1,0],[1,eps]]",
                            )?,
                        );
                        n += 1;
                    }
                }
            }
        }
    }
    Ok((n, best))
}

/// Searches for failures of operator convexity of `x ↦ x^p` on 2x2 matrices and
/// lifts them to `Υ_{p,s}`: with a rank-one `K` when `s = 1`, otherwise via the
/// 4x4 block construction `A = diag(τ X, Y)`, `K = [[1, 0], [1, ε]]` with 2x2 blocks,
/// where `Y` weights the failing direction.
fn operator_search(
    p: f64,
    s: f64,
    cfg: &CounterexampleConfig,
) -> Result<(usize, Option<Candidate>)> {
    let f = JointFunctional::Upsilon { p, s };
    let mut best = None;
    let mut n = 0;
    for trial in 0..cfg.random_trials {
        let mut rng = rng_for(cfg.seed, &[trial as u64]);
        let x0 = random_positive_definite_with(2, (0.05, 5.0), &mut rng)?;
        let x1 = random_positive_definite_with(2, (0.05, 5.0), &mut rng)?;
        let avg = x0.pow(p).interpolate(&x1.pow(p), 0.5);
        let gap = avg
            .add(&x0.interpolate(&x1, 0.5)?.pow(p).scale(-1.0))
            .eig()?;
        if gap.min() >= 0.0 {
            continue;
        }
        let vecs = gap.eigenvectors().as_matrix();
        let v = [vecs[(0, 0)], vecs[(1, 0)]];
        if (s - 1.0).abs() <= tolerances().boundary_slack {
            let k = ComplexMatrix::from_fn(2, 2, |i, j| if j == 0 { v[i] } else { c64(0.0, 0.0) });
            let i2 = PositiveDefiniteMatrix::identity(2);
            keep_best(
                &mut best,
                evaluate(
                    f,
                    Direction::Convex,
                    &x0,
                    &x1,
                    &i2,
                    &i2,
                    &k,
                    "rank-one K on 2x2",
                )?,
            );
            n += 1;
            continue;
        }
        let e = p * (s - 1.0);
        let i4 = PositiveDefiniteMatrix::identity(4);
        for &mu in &[0.3, 0.1, 0.03] {
            // Y^e is largest along v.
            let along = if e < 0.0 { mu } else { 1.0 / mu };
            let y = gap.synthesize(&[along, 1.0]);
            for &t in &[1e-1f64, 1e-2, 1e-3, 1e-4] {
                let tau = t.powf(1.0 / p);
                for &eps in &[1e-2, 1e-3] {
                    let lift = |x: &PositiveDefiniteMatrix| {
                        pdm(x.as_matrix().scale(tau).direct_sum(y.as_matrix()))
                    };
                    let (a0, a1) = (lift(&x0)?, lift(&x1)?);
                    let k = ComplexMatrix::from_fn(4, 4, |i, j| match (i, j) {
                        (i, j) if i == j && i < 2 => c64(1.0, 0.0),
                        (i, j) if i >= 2 && j == i - 2 => c64(1.0, 0.0),
                        (i, j) if i >= 2 && i == j => c64(eps, 0.0),
                        _ => c64(0.0, 0.0),
                    });
                    keep_best(
                        &mut best,
                        evaluate(
                            f,
                            Direction::Convex,
                            &a0,
                            &a1,
                            &i4,
                            &i4,
                            &k,
                            "4x4 block lift",
                        )?,
                    );
                    n += 1;
                }
            }
        }
    }
    Ok((n, best))
}

/// Searches for a certified midpoint violation of `direction` for `Υ_{p,s}`.
///
/// Both directions scan the 2x2 family. The convex direction then also runs
/// the operator-level search. Finding nothing is reported, not an error.
pub fn counterexample_upsilon(
    p: f64,
    s: f64,
    direction: Direction,
    cfg: &CounterexampleConfig,
) -> Result<CounterexampleReport> {
    if !(p.is_finite() && s.is_finite()) || s == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "invalid (p, s) = ({p}, {s})"
        )));
    }
    let (mut n, mut best) = two_by_two_scan(p, s, direction, cfg)?;
    if direction == Direction::Convex
        && best
            .as_ref()
            .is_none_or(|b| b.margin <= tolerances().counterexample_margin)
    {
        let (m, other) = operator_search(p, s, cfg)?;
        n += m;
        if let Some(c) = other {
            keep_best(&mut best, c);
        }
    }
    finish(format!("upsilon(p={p}, s={s})"), direction, n, best)
}

/// Searches for a midpoint violation of `direction` for `Ψ_{p,q,s}` with `K = 1`
/// on `A = diag(a, 1)`, `B = diag(b, 1)`.
pub fn counterexample_psi(
    p: f64,
    q: f64,
    s: f64,
    direction: Direction,
    cfg: &CounterexampleConfig,
) -> Result<CounterexampleReport> {
    if !(p.is_finite() && q.is_finite() && s.is_finite()) || s == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "invalid (p, q, s) = ({p}, {q}, {s})"
        )));
    }
    let f = JointFunctional::Psi { p, q, s };
    let k = ComplexMatrix::identity(2);
    let diag = |x: f64| PositiveDefiniteMatrix::from_real_diagonal(&[x, 1.0]);
    let mut best = None;
    let mut n = 0;
    for &a0 in &cfg.grid {
        for &b0 in &cfg.grid {
            for &a1 in &cfg.grid {
                for &b1 in &cfg.grid {
                    let c = evaluate(
                        f,
                        direction,
                        &diag(a0)?,
                        &diag(a1)?,
                        &diag(b0)?,
                        &diag(b1)?,
                        &k,
                        "diag(a,1), diag(b,1), K=1",
                    )?;
                    keep_best(&mut best, c);
                    n += 1;
                }
            }
        }
    }
    finish(format!("psi(p={p}, q={q}, s={s})"), direction, n, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concavity_fails_beyond_two() {
        let r = counterexample_upsilon(
            2.5,
            0.4,
            Direction::Concave,
            &CounterexampleConfig::default(),
        )
        .unwrap();
        assert!(r.found && r.certified, "{r:?}");
    }

    #[test]
    fn negative_controls() {
        let cfg = CounterexampleConfig {
            random_trials: 20,
            ..Default::default()
        };
        let r = counterexample_upsilon(1.5, 1.0, Direction::Convex, &cfg).unwrap();
        assert!(!r.found, "{r:?}");
        let r = counterexample_upsilon(0.5, 2.0, Direction::Concave, &cfg).unwrap();
        assert!(!r.found, "{r:?}");
    }

    #[test]
    fn psi_mixed_point_fails_both_ways() {
        let cfg = CounterexampleConfig::default();
        for d in [Direction::Convex, Direction::Concave] {
            let r = counterexample_psi(1.2, 0.5, 1.0, d, &cfg).unwrap();
            assert!(r.certified, "{d:?}: {r:?}");
        }
    }

    #[test]
    fn scalar_hessian_sign() {
        // (a, b) ↦ a^3 + b^3 is convex along a, so joint concavity must fail.
        let (a, b, h) = (1.3f64, 0.7f64, 1e-3);
        let f = |x: f64| x.powi(3) + b.powi(3);
        assert!((f(a + h) - 2.0 * f(a) + f(a - h)) / (h * h) > 0.0);
        let r = counterexample_upsilon(
            3.0,
            1.0,
            Direction::Concave,
            &CounterexampleConfig::default(),
        )
        .unwrap();
        assert!(r.certified);
    }
}
