use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::identities::{integral_representation, lieb_thirring_sides, verify_variational};
use super::probe::{verify_opconv, KChoice, ProbeConfig};
use crate::channels::{haar_twirl_second_factor, verify_uhlmann_identity, Dilation, KrausChannel};
use crate::divergences::{
    bs_entropy, classical_relative_entropy, classical_renyi, d_alpha_z, psi, psi_block_embedding,
    psi_on_spectra, umegaki, ClassicalDistribution, ParamPoint,
};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::matrix::{
    ginibre, random_density_with, random_haar_unitary_with, random_positive_definite_with, tensor,
    ComplexMatrix, DensityMatrix, HermitianMatrix,
};
use crate::rng::{derive_seed, rng_for, LabRng};

/// Named identity suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Symmetries,
    Variational,
    LiebThirring,
    Uhlmann,
    Opconv,
    IntegralRep,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = [
        "symmetries",
        "variational",
        "lieb-thirring",
        "uhlmann",
        "opconv",
        "integral-rep",
        "all",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Symmetries => "symmetries",
            Suite::Variational => "variational",
            Suite::LiebThirring => "lieb-thirring",
            Suite::Uhlmann => "uhlmann",
            Suite::Opconv => "opconv",
            Suite::IntegralRep => "integral-rep",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "symmetries" => Suite::Symmetries,
            "variational" => Suite::Variational,
            "lieb-thirring" => Suite::LiebThirring,
            "uhlmann" => Suite::Uhlmann,
            "opconv" => Suite::Opconv,
            "integral-rep" => Suite::IntegralRep,
            "all" => Suite::All,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown suite '{other}' (expected one of {})",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    /// Worst error (or margin) seen.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, samples: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            samples,
            worst,
            tolerance,
            passed: worst <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.checks.len()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<22} samples={:<5} worst={:.3e} tol={:.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.samples,
                c.worst,
                c.tolerance
            )?;
        }
        write!(
            f,
            "{}/{} identity suites passed",
            self.passed(),
            self.checks.len()
        )
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Symmetries => symmetries(seed)?,
        Suite::Variational => variational(seed)?,
        Suite::LiebThirring => lieb_thirring(seed)?,
        Suite::Uhlmann => uhlmann(seed)?,
        Suite::Opconv => opconv(seed)?,
        Suite::IntegralRep => integral_rep()?,
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::Symmetries,
                Suite::Variational,
                Suite::LiebThirring,
                Suite::Uhlmann,
                Suite::Opconv,
                Suite::IntegralRep,
            ] {
                all.extend(run_suite(s, seed)?.checks);
            }
            all
        }
    };
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        seed,
        checks,
    })
}

const SYMMETRY_SAMPLES: usize = 40;

fn psi_points() -> [ParamPoint; 6] {
    [
        ParamPoint::new(0.5, 0.3, 1.0),
        ParamPoint::new(1.5, -0.5, 1.2),
        ParamPoint::new(-0.4, -0.6, 2.0),
        ParamPoint::new(2.0, -0.5, 0.8),
        ParamPoint::new(0.7, 0.2, 0.6),
        ParamPoint::new(2.5, 0.4, 1.0),
    ]
}

fn alpha_z_points() -> [(f64, f64); 5] {
    [(0.5, 1.0), (2.0, 1.0), (2.0, 2.0), (1.5, 0.75), (3.0, 3.0)]
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn random_probabilities(n: usize, rng: &mut LabRng) -> Result<ClassicalDistribution> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let last: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - last;
    ClassicalDistribution::new(p)
}

fn symmetries(seed: u64) -> Result<Vec<CheckResult>> {
    let mut sign = 0.0f64;
    let mut swap = 0.0f64;
    let mut block = 0.0f64;
    let mut tens = 0.0f64;
    let mut unit = 0.0f64;
    let mut comm = 0.0f64;
    for i in 0..SYMMETRY_SAMPLES {
        let mut rng = rng_for(seed, &[0, i as u64]);
        let dim = 2 + i % 2;
        let a = random_positive_definite_with(dim, (0.2, 5.0), &mut rng)?;
        let b = random_positive_definite_with(dim, (0.2, 5.0), &mut rng)?;
        let k = ginibre(dim, dim, &mut rng);
        let kinv_star = k.inverse()?.adjoint();
        for pt in psi_points() {
            let base = psi(&a, &b, &k, pt)?;
            sign = sign.max(rel_err(base, psi(&a, &b, &kinv_star, pt.sign_flipped())?));
            swap = swap.max(rel_err(base, psi(&b, &a, &k.adjoint(), pt.swapped())?));
            block = block.max(rel_err(base, psi_block_embedding(&a, &b, &k, pt)?));
        }

        let rho = random_density_with(dim, dim, &mut rng)?;
        let sigma = random_density_with(dim, dim, &mut rng)?;
        let env = 2 + i % 2;
        let tau = DensityMatrix::basis_projector(env, i % env);
        let lift = |x: &DensityMatrix| -> Result<DensityMatrix> {
            DensityMatrix::new_allow_singular(HermitianMatrix::new(tensor(
                x.as_matrix(),
                tau.as_matrix(),
            ))?)
        };
        let (rt, st) = (lift(&rho)?, lift(&sigma)?);
        for (alpha, z) in alpha_z_points() {
            let pt = ParamPoint::from_alpha_z(alpha, z)?;
            let small = psi_on_spectra(
                rho.spectrum(),
                sigma.spectrum(),
                &ComplexMatrix::identity(dim),
                pt,
            )?;
            let big = psi_on_spectra(
                rt.spectrum(),
                st.spectrum(),
                &ComplexMatrix::identity(dim * env),
                pt,
            )?;
            tens = tens.max(rel_err(small, big));
        }

        let u = random_haar_unitary_with(dim, &mut rng);
        let um = u.as_matrix();
        let (au, bu) = (a.conjugate_by(um)?, b.conjugate_by(um)?);
        let (ru, su) = (rho.conjugate_by(um)?, sigma.conjugate_by(um)?);
        let eye = ComplexMatrix::identity(dim);
        for pt in psi_points() {
            unit = unit.max(rel_err(psi(&a, &b, &eye, pt)?, psi(&au, &bu, &eye, pt)?));
        }
        for (alpha, z) in alpha_z_points() {
            unit = unit.max(rel_err(
                d_alpha_z(&rho, &sigma, alpha, z)?.value,
                d_alpha_z(&ru, &su, alpha, z)?.value,
            ));
        }
        unit = unit.max(rel_err(
            umegaki(&rho, &sigma)?.value,
            umegaki(&ru, &su)?.value,
        ));
        unit = unit.max(rel_err(
            bs_entropy(&rho, &sigma)?.value,
            bs_entropy(&ru, &su)?.value,
        ));

        let r = random_probabilities(dim, &mut rng)?;
        let s = random_probabilities(dim, &mut rng)?;
        let (rq, sq) = (
            DensityMatrix::from_probabilities(r.probs())?,
            DensityMatrix::from_probabilities(s.probs())?,
        );
        for (alpha, z) in alpha_z_points() {
            comm = comm.max(rel_err(
                d_alpha_z(&rq, &sq, alpha, z)?.value,
                classical_renyi(&r, &s, alpha)?.value,
            ));
        }
        let kl = classical_relative_entropy(&r, &s)?.value;
        comm = comm.max(rel_err(umegaki(&rq, &sq)?.value, kl));
        comm = comm.max(rel_err(bs_entropy(&rq, &sq)?.value, kl));
    }
    let n = SYMMETRY_SAMPLES;
    Ok(vec![
        CheckResult::new("sign-flip", n, sign, 1e-9),
        CheckResult::new("swap", n, swap, 1e-9),
        CheckResult::new("block-embedding", n, block, 1e-10),
        CheckResult::new("tensor", n, tens, 1e-9),
        CheckResult::new("unitary-invariance", n, unit, 1e-10),
        CheckResult::new("commuting-reduction", n, comm, 1e-10),
    ])
}

fn variational(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (idx, (s, name)) in [
        (2.0, "var-sup s=2"),
        (3.5, "var-sup s=3.5"),
        (-0.7, "var-sup s=-0.7"),
        (0.5, "var-inf s=0.5"),
        (0.2, "var-inf s=0.2"),
    ]
    .into_iter()
    .enumerate()
    {
        let mut attain = 0.0f64;
        let mut bound = f64::NEG_INFINITY;
        let reps = 5;
        for r in 0..reps {
            let mut rng = rng_for(seed, &[1, idx as u64, r]);
            let x = random_positive_definite_with(3, (0.1, 5.0), &mut rng)?;
            let rep = verify_variational(&x, s, 200, derive_seed(seed, &[2, idx as u64, r]))?;
            let scale = rep.target.abs().max(1.0);
            attain = attain.max(rep.attainment_error / scale);
            bound = bound.max(rep.worst_bound_excess / scale);
        }
        out.push(CheckResult::new(
            &format!("{name} attain"),
            reps as usize,
            attain,
            1e-9,
        ));
        out.push(CheckResult::new(
            &format!("{name} bound"),
            reps as usize * 200,
            bound,
            1e-10,
        ));
    }
    Ok(out)
}

fn lieb_thirring(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (idx, s) in [0.3, 0.5, 0.9].into_iter().enumerate() {
        let mut worst = f64::NEG_INFINITY;
        let n = 500;
        for i in 0..n {
            let mut rng = rng_for(seed, &[3, idx as u64, i as u64]);
            let dim = 2 + i % 2;
            let x = random_density_with(dim, dim, &mut rng)?;
            let y = random_density_with(dim, 1 + i % dim, &mut rng)?;
            let (lhs, rhs) = lieb_thirring_sides(x.as_hermitian(), y.as_hermitian(), s)?;
            worst = worst.max((lhs - rhs) / rhs.abs().max(1.0));
        }
        out.push(CheckResult::new(
            &format!("lieb-thirring s={s}"),
            n,
            worst,
            1e-10,
        ));
    }
    Ok(out)
}

fn uhlmann(seed: u64) -> Result<Vec<CheckResult>> {
    let n = 50;
    let mut worst = 0.0f64;
    let mut idem = 0.0f64;
    let mut controls_rejected = 0usize;
    for i in 0..n {
        let mut rng = rng_for(seed, &[4, i as u64]);
        let dim = 2 + i % 2;
        let env = 1 + i % 4;
        let ch = KrausChannel::random_cptp(dim, env, rng.random())?;
        let rho = random_density_with(dim, dim, &mut rng)?;
        // Distance between the twirled dilation and E(ρ) ⊗ 1/env.
        let dil = ch.dilation().ok_or(Error::MissingDilation)?;
        let u = dil.unitary.as_matrix();
        let joint = u.matmul(&tensor(rho.as_matrix(), &dil.tau()).matmul(&u.adjoint())?)?;
        let lhs = haar_twirl_second_factor(&joint, (dim, env))?;
        let rhs = tensor(
            &ch.apply_matrix(rho.as_matrix())?,
            &ComplexMatrix::identity(env).scale(1.0 / env as f64),
        );
        worst = worst.max(lhs.distance(&rhs));
        let twice = haar_twirl_second_factor(&lhs, (dim, env))?;
        idem = idem.max(lhs.distance(&twice));
        if env > 1 {
            let other = random_haar_unitary_with(dim * env, &mut rng);
            let corrupted = ch.clone().with_dilation(Dilation {
                unitary: other,
                env_dim: env,
            });
            controls_rejected += usize::from(!verify_uhlmann_identity(&corrupted, &rho, 1e-9)?);
        }
    }
    let controls = (0..n).filter(|i| 1 + i % 4 > 1).count();
    Ok(vec![
        CheckResult::new("uhlmann-twirl", n, worst, 1e-9),
        CheckResult::new("twirl-idempotence", n, idem, 1e-12),
        CheckResult::new(
            "corrupted-dilation",
            controls,
            (controls - controls_rejected) as f64,
            0.0,
        ),
    ])
}

fn opconv(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (idx, (q, k)) in [
        (-1.0, KChoice::Identity),
        (-1.0, KChoice::Random),
        (-0.5, KChoice::Random),
        (0.0, KChoice::Random),
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = ProbeConfig {
            dim: 3,
            samples: 300,
            seed: derive_seed(seed, &[5, idx as u64]),
            k,
            spectrum: (0.2, 5.0),
            mode: ExecMode::default(),
            ..ProbeConfig::default()
        };
        let r = verify_opconv(q, &cfg)?;
        let name = format!(
            "opconv q={q} K={}",
            if k == KChoice::Identity {
                "1"
            } else {
                "random"
            }
        );
        out.push(CheckResult {
            name,
            samples: r.samples,
            worst: r.worst_margin,
            tolerance: 0.0,
            passed: r.passed(),
        });
    }
    Ok(out)
}

fn integral_rep() -> Result<Vec<CheckResult>> {
    let cases = [
        (1.0, 0.5),
        (4.0, 0.5),
        (2.7, 0.31),
        (1e-3, 0.1),
        (0.2, 0.7),
        (50.0, 0.95),
        (1e3, 0.5),
    ];
    let mut worst = 0.0f64;
    for (x, s) in cases {
        let v = integral_representation(x, s, 200)?;
        worst = worst.max((v - f64::powf(x, s)).abs() / f64::powf(x, s).max(1.0));
    }
    Ok(vec![CheckResult::new(
        "integral-rep 200 nodes",
        cases.len(),
        worst,
        1e-6,
    )])
}
