use std::io::Write;
use std::path::{Path, PathBuf};

use divlab_core::divergences::ParamPoint;
use divlab_core::lab::{
    classify as classify_psi, classify_upsilon, counterexample_psi, counterexample_upsilon,
    point_seed, probe_direction, probe_dpi, probe_joint, render_csv, run_suite, run_sweep,
    CounterexampleConfig, DpiConfig, JointFunctional, KChoice, ProbeConfig, ProbeReport,
    RegionKind, RegionLabel, Suite, SweepConfig,
};
use divlab_core::matrix::{DensityMatrix, MatrixFile};
use divlab_core::stein::{
    error_exponent_curve, quantum_rate_curve, render_stein_csv, ClassicalDistribution,
};
use divlab_core::{Error, ExecMode};
use serde::Serialize;

use crate::config::{self, ProbeFile, SteinFile, SweepFile};
use crate::{
    ClassifyArgs, CliError, CounterexampleArgs, DpiArgs, KArg, ProbeArgs, SteinArgs, SweepArgs,
    VerifyArgs,
};

const DEFAULT_WITNESS_DIR: &str = "witnesses";

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::usage(format!("cannot write to stdout: {e}")))
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::numerical(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

pub fn classify(a: ClassifyArgs) -> Result<(), CliError> {
    let label = match a.q {
        Some(q) if !a.upsilon => classify_psi(a.p, q, a.s)?,
        _ => classify_upsilon(a.p, a.s)?,
    };
    println!("{label}");
    Ok(())
}

pub fn sweep(a: SweepArgs, mode: ExecMode) -> Result<(), CliError> {
    let file: SweepFile = config::load(&a.config)?;
    let cfg = SweepConfig {
        grid: file.grid,
        dim: file.dim,
        samples: file.samples,
        seed: file.seed,
        spectrum: file.spectrum,
        k: file.k,
        witness_dir: Some(
            a.witness_dir
                .or(file.witness_dir)
                .unwrap_or_else(|| DEFAULT_WITNESS_DIR.into()),
        ),
        mode,
    };
    let rows = run_sweep(&cfg)?;
    let out = a.out.or(file.output);
    emit(out.as_deref(), &render_csv(&rows))
}

#[derive(Serialize)]
struct ProbeOutput {
    point: ParamPoint,
    label: String,
    master_seed: u64,
    report: ProbeReport,
    witness_path: Option<PathBuf>,
}

fn load_probe_file(path: Option<&PathBuf>) -> Result<ProbeFile, CliError> {
    match path {
        Some(p) => config::load(p),
        None => Ok(ProbeFile {
            schema_version: config::SCHEMA_VERSION,
            ..ProbeFile::default()
        }),
    }
}

fn require_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    flag.or(file).ok_or_else(|| {
        CliError::usage("a master seed is required (--seed or `seed` in the config)")
    })
}

/// Writes the witness and returns the contradiction error when a Known label is violated.
fn check_contradiction(
    label: &RegionLabel,
    tested: divlab_core::lab::Direction,
    report: &ProbeReport,
    point: String,
    witness_dir: &Path,
) -> Result<Option<Error>, CliError> {
    if report.violations == 0 || label.kind.known_direction() != Some(tested) {
        return Ok(None);
    }
    let witness = match &report.witness {
        Some(w) => Some(w.write_to_dir(witness_dir)?),
        None => None,
    };
    Ok(Some(Error::Contradiction {
        point,
        label: label.to_string(),
        witness,
    }))
}

pub fn probe(a: ProbeArgs, mode: ExecMode) -> Result<(), CliError> {
    let file = load_probe_file(a.config.as_ref())?;
    let master = require_seed(a.seed, file.seed)?;
    let pt = ParamPoint::new(a.p, a.q, a.s);
    let label = classify_psi(a.p, a.q, a.s)?;
    let direction = a
        .direction
        .map(Into::into)
        .unwrap_or_else(|| probe_direction(&label));
    let defaults = ProbeConfig::default();
    let dim = a.dim.or(file.dim).unwrap_or(2);
    let cfg = ProbeConfig {
        dim,
        samples: a.samples.or(file.samples).unwrap_or(200),
        seed: point_seed(master, pt, dim),
        spectrum: file.spectrum.unwrap_or(defaults.spectrum),
        k: match a.k {
            Some(KArg::Identity) => KChoice::Identity,
            Some(KArg::Random) => KChoice::Random,
            None => file.k.unwrap_or_default(),
        },
        theta: file.theta.unwrap_or(defaults.theta),
        mode,
        ..defaults
    };
    let report = probe_joint(JointFunctional::psi(pt), direction, &cfg)?;
    let witness_dir = a
        .witness_dir
        .or(file.witness_dir)
        .unwrap_or_else(|| DEFAULT_WITNESS_DIR.into());
    let point = format!("(p={}, q={}, s={})", a.p, a.q, a.s);
    let contradiction = check_contradiction(&label, direction, &report, point, &witness_dir)?;
    let witness_path = match &contradiction {
        Some(Error::Contradiction { witness, .. }) => witness.clone(),
        _ => None,
    };
    emit_json(
        a.out.as_deref(),
        &ProbeOutput {
            point: pt,
            label: label.to_string(),
            master_seed: master,
            report,
            witness_path,
        },
    )?;
    contradiction.map_or(Ok(()), |e| Err(e.into()))
}

#[derive(Serialize)]
struct DpiOutput {
    alpha: f64,
    z: f64,
    label: String,
    /// Whether the label of the underlying trace functional implies monotonicity.
    monotonicity_known: bool,
    report: ProbeReport,
    witness_path: Option<PathBuf>,
}

pub fn dpi(a: DpiArgs, mode: ExecMode) -> Result<(), CliError> {
    let file = load_probe_file(a.config.as_ref())?;
    let cfg = DpiConfig {
        dim: a.dim.or(file.dim).unwrap_or(2),
        channels: a.channels.or(file.channels).unwrap_or(100),
        state_pairs: a.pairs.or(file.state_pairs).unwrap_or(100),
        seed: require_seed(a.seed, file.seed)?,
        mode,
    };
    let pt = ParamPoint::from_alpha_z(a.alpha, a.z)?;
    let label = classify_psi(pt.p, pt.q, pt.s)?;
    let implied = if a.alpha < 1.0 {
        RegionKind::ConcaveKnown
    } else {
        RegionKind::ConvexKnown
    };
    let known = label.kind == implied;
    let report = probe_dpi(a.alpha, a.z, &cfg)?;
    let mut contradiction = None;
    if known && report.violations > 0 {
        let witness_dir = a
            .witness_dir
            .or(file.witness_dir)
            .unwrap_or_else(|| DEFAULT_WITNESS_DIR.into());
        let witness = match &report.witness {
            Some(w) => Some(w.write_to_dir(&witness_dir)?),
            None => None,
        };
        contradiction = Some(Error::Contradiction {
            point: format!("(alpha={}, z={})", a.alpha, a.z),
            label: label.to_string(),
            witness,
        });
    }
    let witness_path = match &contradiction {
        Some(Error::Contradiction { witness, .. }) => witness.clone(),
        _ => None,
    };
    emit_json(
        a.out.as_deref(),
        &DpiOutput {
            alpha: a.alpha,
            z: a.z,
            label: label.to_string(),
            monotonicity_known: known,
            report,
            witness_path,
        },
    )?;
    contradiction.map_or(Ok(()), |e| Err(e.into()))
}

fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let m = MatrixFile::parse(&text)?;
    Ok(DensityMatrix::from_matrix(m)?)
}

pub fn stein(a: SteinArgs, mode: ExecMode) -> Result<(), CliError> {
    let n_flag = a.n.as_deref().map(config::parse_n_list).transpose()?;
    let rows = if let (Some(rho), Some(sigma)) = (&a.rho, &a.sigma) {
        let eps = a.eps.ok_or_else(|| CliError::usage("--eps is required"))?;
        let ns = n_flag.ok_or_else(|| CliError::usage("--N is required"))?;
        quantum_rate_curve(&read_state(rho)?, &read_state(sigma)?, eps, &ns, mode)?
    } else {
        let (r, s, eps, ns) = match &a.config {
            Some(path) => {
                let f: SteinFile = config::load(path)?;
                let ns = match n_flag {
                    Some(ns) => ns,
                    None => f.n.values()?,
                };
                (f.r, f.s, a.eps.unwrap_or(f.epsilon), ns)
            }
            None => (
                a.r.ok_or_else(|| CliError::usage("--r is required"))?.0,
                a.s.ok_or_else(|| CliError::usage("--s is required"))?.0,
                a.eps.ok_or_else(|| CliError::usage("--eps is required"))?,
                n_flag.ok_or_else(|| CliError::usage("--N is required"))?,
            ),
        };
        let (r, s) = (
            ClassicalDistribution::new(r)?,
            ClassicalDistribution::new(s)?,
        );
        error_exponent_curve(&r, &s, eps, &ns, mode)?
    };
    emit(a.out.as_deref(), &render_stein_csv(&rows))
}

#[derive(Serialize)]
struct CounterexampleOutput {
    #[serde(flatten)]
    report: divlab_core::lab::CounterexampleReport,
    witness_path: Option<PathBuf>,
}

pub fn counterexample(a: CounterexampleArgs) -> Result<(), CliError> {
    let cfg = CounterexampleConfig {
        seed: a.seed,
        ..CounterexampleConfig::default()
    };
    let report = match a.q {
        Some(q) => counterexample_psi(a.p, q, a.s, a.direction.into(), &cfg)?,
        None => counterexample_upsilon(a.p, a.s, a.direction.into(), &cfg)?,
    };
    let witness_path = match (&a.witness_dir, &report.witness, report.found) {
        (Some(dir), Some(w), true) => Some(w.write_to_dir(dir)?),
        _ => None,
    };
    emit_json(
        a.out.as_deref(),
        &CounterexampleOutput {
            report,
            witness_path,
        },
    )
}

pub fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let suite: Suite = a.suite.parse()?;
    let report = run_suite(suite, a.seed)?;
    if a.json {
        emit_json(None, &report)?;
    } else {
        println!("{report}");
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::numerical(format!(
            "{} of {} checks failed",
            report.checks.len() - report.passed(),
            report.checks.len()
        )))
    }
}
