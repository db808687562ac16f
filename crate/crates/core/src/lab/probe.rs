use rand::Rng;
use serde::{Deserialize, Serialize};

use super::classify::Direction;
use crate::channels::{ChannelFile, KrausChannel};
use crate::divergences::{
    d_alpha_z, hiai_functional, psi, psi_block_embedding, upsilon, ParamPoint,
};
use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, ExecMode};
use crate::matrix::{
    ginibre, random_density_with, random_hermitian_with, random_positive_definite_with,
    ComplexMatrix, DensityMatrix, HermitianMatrix, MatrixFile, PositiveDefiniteMatrix,
};
use crate::rng::{rng_for, LabRng};
use crate::tolerance::tolerances;

/// A scalar functional of a pair `(A, B)` with a fixed `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JointFunctional {
    Psi { p: f64, q: f64, s: f64 },
    Hiai { p: f64, q: f64, t: f64 },
    Upsilon { p: f64, s: f64 },
    Constant { value: f64 },
}

impl JointFunctional {
    pub fn psi(pt: ParamPoint) -> Self {
        JointFunctional::Psi {
            p: pt.p,
            q: pt.q,
            s: pt.s,
        }
    }

    pub fn eval(
        &self,
        a: &PositiveDefiniteMatrix,
        b: &PositiveDefiniteMatrix,
        k: &ComplexMatrix,
    ) -> Result<f64> {
        match *self {
            JointFunctional::Psi { p, q, s } => psi(a, b, k, ParamPoint::new(p, q, s)),
            JointFunctional::Hiai { p, q, t } => hiai_functional(a, b, k, p, q, t),
            JointFunctional::Upsilon { p, s } => upsilon(a, k, p, s),
            JointFunctional::Constant { value } => Ok(value),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            JointFunctional::Psi { p, q, s } => format!("psi(p={p}, q={q}, s={s})"),
            JointFunctional::Hiai { p, q, t } => format!("hiai(p={p}, q={q}, t={t})"),
            JointFunctional::Upsilon { p, s } => format!("upsilon(p={p}, s={s})"),
            JointFunctional::Constant { value } => format!("constant({value})"),
        }
    }
}

/// How `K` is chosen per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KChoice {
    Identity,
    /// A fresh complex Ginibre matrix per sample (invertible almost surely).
    #[default]
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    /// Eigenvalue range of the random positive definite inputs.
    pub spectrum: (f64, f64),
    pub k: KChoice,
    /// Interpolation weight; `0.5` is the midpoint test.
    pub theta: f64,
    /// Every n-th sample is cross-checked against the block embedding (0 disables).
    pub cross_check_every: usize,
    #[serde(skip)]
    pub mode: ExecMode,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            samples: 500,
            seed: 0,
            spectrum: (0.1, 10.0),
            k: KChoice::Random,
            theta: 0.5,
            cross_check_every: 10,
            mode: ExecMode::default(),
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.samples < 1 {
            return Err(Error::InvalidParameter(
                "dim and samples must be positive".into(),
            ));
        }
        let (lo, hi) = self.spectrum;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "invalid spectrum range ({lo}, {hi})"
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, 1), got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Inputs reproducing a probe's worst margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Joint {
        functional: JointFunctional,
        direction: Direction,
        theta: f64,
        a0: MatrixFile,
        a1: MatrixFile,
        b0: MatrixFile,
        b1: MatrixFile,
        k: MatrixFile,
        margin: f64,
    },
    Dpi {
        alpha: f64,
        z: f64,
        channel: ChannelFile,
        rho: MatrixFile,
        sigma: MatrixFile,
        margin: f64,
    },
    OperatorConvexity {
        q: f64,
        a0: MatrixFile,
        a1: MatrixFile,
        b0: MatrixFile,
        b1: MatrixFile,
        k: MatrixFile,
        margin: f64,
    },
}

impl Witness {
    pub fn recorded_margin(&self) -> f64 {
        match self {
            Witness::Joint { margin, .. }
            | Witness::Dpi { margin, .. }
            | Witness::OperatorConvexity { margin, .. } => *margin,
        }
    }

    /// Recomputes the margin from the stored inputs.
    pub fn reevaluate(&self) -> Result<f64> {
        match self {
            Witness::Joint {
                functional,
                direction,
                theta,
                a0,
                a1,
                b0,
                b1,
                k,
                ..
            } => {
                let (a0, a1) = (pd(a0)?, pd(a1)?);
                let (b0, b1) = (pd(b0)?, pd(b1)?);
                Ok(joint_margin(
                    functional,
                    *direction,
                    *theta,
                    &a0,
                    &a1,
                    &b0,
                    &b1,
                    &k.to_matrix()?,
                )?
                .margin)
            }
            Witness::Dpi {
                alpha,
                z,
                channel,
                rho,
                sigma,
                ..
            } => {
                let ch = channel.to_channel()?;
                let rho =
                    DensityMatrix::new_allow_singular(HermitianMatrix::new(rho.to_matrix()?)?)?;
                let sigma =
                    DensityMatrix::new_allow_singular(HermitianMatrix::new(sigma.to_matrix()?)?)?;
                match dpi_margin(&ch, &rho, &sigma, *alpha, *z)? {
                    Some((m, _)) => Ok(m),
                    None => Err(Error::Numerical("witness divergence is infinite".into())),
                }
            }
            Witness::OperatorConvexity {
                q,
                a0,
                a1,
                b0,
                b1,
                k,
                ..
            } => {
                let (a0, a1) = (pd(a0)?, pd(a1)?);
                let (b0, b1) = (pd(b0)?, pd(b1)?);
                Ok(opconv_margin(*q, &a0, &a1, &b0, &b1, &k.to_matrix()?)?.0)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serialises")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Writes `<dir>/<hash>.json` and returns its path.
    pub fn write_to_dir(&self, dir: &std::path::Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.content_hash()));
        std::fs::write(&path, self.to_json())?;
        Ok(path)
    }
}

fn pd(m: &MatrixFile) -> Result<PositiveDefiniteMatrix> {
    PositiveDefiniteMatrix::from_matrix(m.to_matrix()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub functional: String,
    pub direction: Option<Direction>,
    pub dim: usize,
    pub seed: u64,
    pub samples: usize,
    /// Worst signed margin; positive means the claimed inequality failed.
    pub worst_margin: f64,
    pub violations: usize,
    /// Samples left out (infinite divergences in DPI probes).
    pub skipped: usize,
    pub witness: Option<Witness>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub(crate) struct Margin {
    pub margin: f64,
    pub scale: f64,
}

/// Signed margin of the interpolation inequality; positive is a violation of `direction`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn joint_margin(
    f: &JointFunctional,
    direction: Direction,
    theta: f64,
    a0: &PositiveDefiniteMatrix,
    a1: &PositiveDefiniteMatrix,
    b0: &PositiveDefiniteMatrix,
    b1: &PositiveDefiniteMatrix,
    k: &ComplexMatrix,
) -> Result<Margin> {
    let f0 = f.eval(a0, b0, k)?;
    let f1 = f.eval(a1, b1, k)?;
    let fm = f.eval(&a0.interpolate(a1, theta)?, &b0.interpolate(b1, theta)?, k)?;
    let gap = fm - ((1.0 - theta) * f0 + theta * f1);
    let margin = match direction {
        Direction::Convex => gap,
        Direction::Concave => -gap,
    };
    Ok(Margin {
        margin,
        scale: f0.abs().max(f1.abs()).max(1.0),
    })
}

pub(crate) fn draw_k(choice: KChoice, dim: usize, rng: &mut LabRng) -> ComplexMatrix {
    match choice {
        KChoice::Identity => ComplexMatrix::identity(dim),
        KChoice::Random => ginibre(dim, dim, rng),
    }
}

struct Sample<W> {
    margin: f64,
    violation: bool,
    skipped: bool,
    witness: Option<W>,
}

/// Folds per-sample outcomes in index order; the first worst sample wins ties.
fn fold_samples<W>(samples: Vec<Sample<W>>) -> (f64, usize, usize, Option<W>) {
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let (mut violations, mut skipped) = (0, 0);
    for s in samples {
        if s.skipped {
            skipped += 1;
            continue;
        }
        violations += usize::from(s.violation);
        if s.margin > worst {
            worst = s.margin;
            witness = s.witness;
        }
    }
    (worst, violations, skipped, witness)
}

/// Randomized interpolation test of joint convexity or concavity.
pub fn probe_joint(
    functional: JointFunctional,
    direction: Direction,
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    cfg.validate()?;
    let rel = tolerances().violation_relative;
    let outcomes = try_map_indexed(cfg.mode, cfg.samples, |i| {
        let mut rng = rng_for(cfg.seed, &[i as u64]);
        let a0 = random_positive_definite_with(cfg.dim, cfg.spectrum, &mut rng)?;
        let a1 = random_positive_definite_with(cfg.dim, cfg.spectrum, &mut rng)?;
        let b0 = random_positive_definite_with(cfg.dim, cfg.spectrum, &mut rng)?;
        let b1 = random_positive_definite_with(cfg.dim, cfg.spectrum, &mut rng)?;
        let k = draw_k(cfg.k, cfg.dim, &mut rng);
        let m = joint_margin(&functional, direction, cfg.theta, &a0, &a1, &b0, &b1, &k)
            .map_err(|e| e.at_sample(i))?;
        if cfg.cross_check_every > 0 && i % cfg.cross_check_every == 0 {
            cross_check(&functional, &a0, &b0, &k).map_err(|e| e.at_sample(i))?;
        }
        let witness = Witness::Joint {
            functional,
            direction,
            theta: cfg.theta,
            a0: MatrixFile::from_matrix(a0.as_matrix()),
            a1: MatrixFile::from_matrix(a1.as_matrix()),
            b0: MatrixFile::from_matrix(b0.as_matrix()),
            b1: MatrixFile::from_matrix(b1.as_matrix()),
            k: MatrixFile::from_matrix(&k),
            margin: m.margin,
        };
        Ok(Sample {
            margin: m.margin,
            violation: m.margin > rel * m.scale,
            skipped: false,
            witness: Some(witness),
        })
    })?;
    let (worst_margin, violations, skipped, witness) = fold_samples(outcomes);
    Ok(ProbeReport {
        functional: functional.describe(),
        direction: Some(direction),
        dim: cfg.dim,
        seed: cfg.seed,
        samples: cfg.samples,
        worst_margin,
        violations,
        skipped,
        witness,
    })
}

/// Compares `Ψ` against its block-embedding evaluation.
fn cross_check(
    f: &JointFunctional,
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    k: &ComplexMatrix,
) -> Result<()> {
    if let JointFunctional::Psi { p, q, s } = *f {
        let pt = ParamPoint::new(p, q, s);
        let direct = psi(a, b, k, pt)?;
        let block = psi_block_embedding(a, b, k, pt)?;
        // Both routes lose about κ(A)^|p| κ(B)^|q| ulps, so large exponents
        // widen the agreement band.
        let cond = |m: &PositiveDefiniteMatrix| m.spectrum().max() / m.spectrum().min();
        let amplification = cond(a).powf(p.abs()) * cond(b).powf(q.abs());
        let tol = tolerances().reconstruction.max(1e-14 * amplification);
        if (direct - block).abs() > tol * direct.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "block embedding disagrees with direct evaluation: {direct} vs {block}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpiConfig {
    pub dim: usize,
    pub channels: usize,
    pub state_pairs: usize,
    pub seed: u64,
    #[serde(skip)]
    pub mode: ExecMode,
}

impl Default for DpiConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            channels: 100,
            state_pairs: 100,
            seed: 0,
            mode: ExecMode::default(),
        }
    }
}

/// Channel number `c` of a DPI probe: even indices are Stinespring channels
/// with a random environment size up to `dim^2`, odd ones depolarizing.
pub fn dpi_channel(dim: usize, master: u64, c: usize) -> Result<KrausChannel> {
    let mut rng = rng_for(master, &[0, c as u64]);
    if c.is_multiple_of(2) {
        let env = rng.random_range(1..=dim * dim);
        KrausChannel::random_cptp(dim, env, rng.random())
    } else {
        KrausChannel::depolarizing(dim, rng.random_range(0.0..1.0))
    }
}

/// `D(E ρ || E σ) - D(ρ || σ)` and the scale `max(1, |D(ρ||σ)|)`; `None` when
/// either divergence is infinite.
pub(crate) fn dpi_margin(
    ch: &KrausChannel,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
    z: f64,
) -> Result<Option<(f64, f64)>> {
    let before = d_alpha_z(rho, sigma, alpha, z)?;
    let after = d_alpha_z(&ch.apply(rho)?, &ch.apply(sigma)?, alpha, z)?;
    match (before.get(), after.get()) {
        (Some(b), Some(a)) => Ok(Some((a - b, b.abs().max(1.0)))),
        _ => Ok(None),
    }
}

/// Randomized data-processing test of `D_{α,z}` over channels and state pairs.
pub fn probe_dpi(alpha: f64, z: f64, cfg: &DpiConfig) -> Result<ProbeReport> {
    ParamPoint::from_alpha_z(alpha, z)?;
    if cfg.dim < 1 || cfg.channels < 1 || cfg.state_pairs < 1 {
        return Err(Error::InvalidParameter(
            "dim, channels and state_pairs must be positive".into(),
        ));
    }
    let channels = try_map_indexed(cfg.mode, cfg.channels, |c| {
        dpi_channel(cfg.dim, cfg.seed, c)
    })?;
    let rel = tolerances().violation_relative;
    let n = cfg.channels * cfg.state_pairs;
    let outcomes = try_map_indexed(cfg.mode, n, |i| {
        let (c, j) = (i / cfg.state_pairs, i % cfg.state_pairs);
        let ch = &channels[c];
        let mut rng = rng_for(cfg.seed, &[1, c as u64, j as u64]);
        // Every tenth pair uses a rank-deficient rho to exercise the support rules.
        let rank = if j % 10 == 9 && cfg.dim > 1 {
            cfg.dim - 1
        } else {
            cfg.dim
        };
        let rho = random_density_with(cfg.dim, rank, &mut rng)?;
        let sigma = random_density_with(cfg.dim, cfg.dim, &mut rng)?;
        let Some((margin, scale)) =
            dpi_margin(ch, &rho, &sigma, alpha, z).map_err(|e| e.at_sample(i))?
        else {
            return Ok(Sample {
                margin: f64::NEG_INFINITY,
                violation: false,
                skipped: true,
                witness: None,
            });
        };
        Ok(Sample {
            margin,
            violation: margin > rel * scale,
            skipped: false,
            witness: Some(Witness::Dpi {
                alpha,
                z,
                channel: ch.to_file(),
                rho: MatrixFile::from_matrix(rho.as_matrix()),
                sigma: MatrixFile::from_matrix(sigma.as_matrix()),
                margin,
            }),
        })
    })?;
    let (worst_margin, violations, skipped, witness) = fold_samples(outcomes);
    Ok(ProbeReport {
        functional: format!("D_alpha_z(alpha={alpha}, z={z})"),
        direction: None,
        dim: cfg.dim,
        seed: cfg.seed,
        samples: n,
        worst_margin,
        violations,
        skipped,
        witness,
    })
}

/// `(A, B) ↦ A K B^q K* A` at the midpoint against the average; returns the
/// negated smallest eigenvalue of `avg - M(mid)` and the scale.
pub(crate) fn opconv_margin(
    q: f64,
    a0: &PositiveDefiniteMatrix,
    a1: &PositiveDefiniteMatrix,
    b0: &PositiveDefiniteMatrix,
    b1: &PositiveDefiniteMatrix,
    k: &ComplexMatrix,
) -> Result<(f64, f64)> {
    let m = |a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix| -> Result<ComplexMatrix> {
        let am = a.as_matrix();
        am.matmul(&k.matmul(&b.pow(q).as_matrix().matmul(&k.adjoint().matmul(am)?)?)?)
    };
    let m0 = m(a0, b0)?;
    let m1 = m(a1, b1)?;
    let mm = m(&a0.interpolate(a1, 0.5)?, &b0.interpolate(b1, 0.5)?)?;
    let diff = &(&m0 + &m1).scale(0.5) - &mm;
    let spec = HermitianMatrix::symmetrize(&diff)?.eig()?;
    let scale = m0.frobenius_norm().max(m1.frobenius_norm()).max(1.0);
    Ok((-spec.min(), scale))
}

/// Operator-level midpoint test of `(A, B) ↦ A K B^q K* A` in the PSD order.
pub fn verify_opconv(q: f64, cfg: &ProbeConfig) -> Result<ProbeReport> {
    if !(-1.0..=0.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in [-1, 0], got {q}"
        )));
    }
    cfg.validate()?;
    let rel = tolerances().violation_relative;
    let outcomes = try_map_indexed(cfg.mode, cfg.samples, |i| {
        let mut rng = rng_for(cfg.seed, &[i as u64]);
        let a0 = random_positive_definite_with(cfg.dim, cfg.spectrum, &mut rng)?;
        let a1 = random_positive_definite_with(cfg.dim, cfg.spectrum, &mut rng)?;
        let b0 = random_positive_definite_with(cfg.dim, cfg.spectrum, &mut rng)?;
        let b1 = random_positive_definite_with(cfg.dim, cfg.spectrum, &mut rng)?;
        let k = draw_k(cfg.k, cfg.dim, &mut rng);
        let (margin, scale) =
            opconv_margin(q, &a0, &a1, &b0, &b1, &k).map_err(|e| e.at_sample(i))?;
        Ok(Sample {
            margin,
            violation: margin > rel * scale,
            skipped: false,
            witness: Some(Witness::OperatorConvexity {
                q,
                a0: MatrixFile::from_matrix(a0.as_matrix()),
                a1: MatrixFile::from_matrix(a1.as_matrix()),
                b0: MatrixFile::from_matrix(b0.as_matrix()),
                b1: MatrixFile::from_matrix(b1.as_matrix()),
                k: MatrixFile::from_matrix(&k),
                margin,
            }),
        })
    })?;
    let (worst_margin, violations, skipped, witness) = fold_samples(outcomes);
    Ok(ProbeReport {
        functional: format!("A K B^q K* A (q={q})"),
        direction: Some(Direction::Convex),
        dim: cfg.dim,
        seed: cfg.seed,
        samples: cfg.samples,
        worst_margin,
        violations,
        skipped,
        witness,
    })
}

/// A segment `ξ ↦ (C + ξG, D + ξH)` through the positive definite cone.
#[derive(Debug, Clone, PartialEq)]
pub struct LineProbe {
    pub c: PositiveDefiniteMatrix,
    pub d: PositiveDefiniteMatrix,
    pub g: HermitianMatrix,
    pub h: HermitianMatrix,
    pub xi_values: Vec<f64>,
}

impl LineProbe {
    /// Fails unless `C + ξG` and `D + ξH` are positive definite at every `ξ`.
    pub fn new(
        c: PositiveDefiniteMatrix,
        d: PositiveDefiniteMatrix,
        g: HermitianMatrix,
        h: HermitianMatrix,
        xi_values: Vec<f64>,
    ) -> Result<Self> {
        let lp = Self {
            c,
            d,
            g,
            h,
            xi_values,
        };
        for &xi in &lp.xi_values {
            lp.at(xi)?;
        }
        Ok(lp)
    }

    pub fn at(&self, xi: f64) -> Result<(PositiveDefiniteMatrix, PositiveDefiniteMatrix)> {
        let a = PositiveDefiniteMatrix::new(self.c.as_hermitian().add(&self.g.scale(xi)))?;
        let b = PositiveDefiniteMatrix::new(self.d.as_hermitian().add(&self.h.scale(xi)))?;
        Ok((a, b))
    }

    /// Random probe with `C, D` drawn from `spectrum` and directions scaled so
    /// that `|ξ| <= 1` stays well inside the cone.
    pub fn random(dim: usize, spectrum: (f64, f64), n_xi: usize, rng: &mut LabRng) -> Result<Self> {
        let c = random_positive_definite_with(dim, spectrum, rng)?;
        let d = random_positive_definite_with(dim, spectrum, rng)?;
        let direction =
            |base: &PositiveDefiniteMatrix, rng: &mut LabRng| -> Result<HermitianMatrix> {
                let g = random_hermitian_with(dim, rng);
                let norm = g
                    .eig()?
                    .eigenvalues()
                    .iter()
                    .fold(0.0f64, |m, l| m.max(l.abs()));
                Ok(g.scale(0.5 * base.min_eigenvalue() / norm.max(f64::MIN_POSITIVE)))
            };
        let g = direction(&c, rng)?;
        let h = direction(&d, rng)?;
        let xi = if n_xi <= 1 {
            vec![0.0]
        } else {
            (0..n_xi)
                .map(|i| -0.9 + 1.8 * i as f64 / (n_xi - 1) as f64)
                .collect()
        };
        Self::new(c, d, g, h, xi)
    }
}

/// `[F(ξ-h) - 2F(ξ) + F(ξ+h)] / h²` along the probe, one value per `ξ`.
pub fn probe_line_second_difference<F>(f: F, lp: &LineProbe, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&PositiveDefiniteMatrix, &PositiveDefiniteMatrix) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {h}"
        )));
    }
    lp.xi_values
        .iter()
        .map(|&xi| {
            let eval = |x: f64| -> Result<f64> {
                let (a, b) = lp.at(x)?;
                f(&a, &b)
            };
            Ok((eval(xi - h)? - 2.0 * eval(xi)? + eval(xi + h)?) / (h * h))
        })
        .collect()
}
