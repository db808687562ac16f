use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::divergences::{classical_relative_entropy, ClassicalDistribution};
use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, ExecMode};

/// Largest per-type search space solved by exhaustive enumeration.
const EXACT_SEARCH_LIMIT: f64 = 2e6;
const MAX_TYPES: usize = 5_000_000;
/// Absolute slack on the coverage constraint `r(A) >= 1 - ε`.
pub(crate) const COVERAGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    /// Exhaustive search over how many sequences of each type are accepted.
    ExactEnumeration,
    /// Whole types by likelihood ratio, then part of the boundary type.
    NeymanPearsonGreedy,
    /// Whole types above a likelihood-ratio threshold.
    ThresholdFamily,
    /// Spectral projections of `ρ^⊗N - t σ^⊗N`.
    ProjectionFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisTestResult {
    pub n: usize,
    pub epsilon: f64,
    /// Natural log of the smallest type-II error found; `-inf` when it vanishes.
    pub log_beta: f64,
    pub rate: f64,
    pub method: TestMethod,
    pub acceptance: String,
}

impl HypothesisTestResult {
    pub(crate) fn new(
        n: usize,
        epsilon: f64,
        log_beta: f64,
        method: TestMethod,
        acceptance: String,
    ) -> Self {
        let log_beta = log_beta.min(0.0);
        Self {
            n,
            epsilon,
            log_beta,
            rate: if log_beta == 0.0 {
                0.0
            } else {
                -log_beta / n as f64
            },
            method,
            acceptance,
        }
    }
}

pub(crate) fn validate_test(n: usize, epsilon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// One type class: all sequences with the same symbol counts.
#[derive(Debug, Clone)]
struct TypeClass {
    counts: Vec<usize>,
    /// ln of the number of sequences.
    log_size: f64,
    /// ln of r^⊗N and s^⊗N at any single sequence of the type.
    log_r: f64,
    log_s: f64,
}

impl TypeClass {
    fn log_ratio(&self) -> f64 {
        match (
            self.log_r == f64::NEG_INFINITY,
            self.log_s == f64::NEG_INFINITY,
        ) {
            (true, _) => f64::NEG_INFINITY,
            (false, true) => f64::INFINITY,
            _ => self.log_r - self.log_s,
        }
    }

    fn r_mass(&self) -> f64 {
        (self.log_size + self.log_r).exp()
    }

    fn size(&self) -> f64 {
        self.log_size.exp().round()
    }
}

fn ln_prob(count: usize, p: f64) -> f64 {
    if count == 0 {
        0.0
    } else if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        count as f64 * p.ln()
    }
}

/// Type classes sorted by likelihood ratio, largest first; ties keep enumeration order.
fn sorted_types(
    r: &ClassicalDistribution,
    s: &ClassicalDistribution,
    n: usize,
) -> Result<Vec<TypeClass>> {
    if r.len() != s.len() {
        return Err(Error::mismatch("hypothesis alphabets", r.len(), s.len()));
    }
    // Symbols impossible under both hypotheses never occur.
    let support: Vec<usize> = (0..r.len())
        .filter(|&i| r.probs()[i] > 0.0 || s.probs()[i] > 0.0)
        .collect();
    let k = support.len();
    let n_types = binomial_f64(n + k - 1, k - 1);
    if n_types > MAX_TYPES as f64 {
        return Err(Error::InvalidParameter(format!(
            "{n_types:.0} type classes at N = {n} exceed the enumeration limit"
        )));
    }
    let lnf_n = ln_factorial(n as u64);
    let mut out = Vec::with_capacity(n_types as usize);
    let mut counts = vec![0usize; k];
    counts[k - 1] = n;
    loop {
        let mut log_size = lnf_n;
        let (mut log_r, mut log_s) = (0.0, 0.0);
        for (j, &c) in counts.iter().enumerate() {
            log_size -= ln_factorial(c as u64);
            log_r += ln_prob(c, r.probs()[support[j]]);
            log_s += ln_prob(c, s.probs()[support[j]]);
        }
        out.push(TypeClass {
            counts: counts.clone(),
            log_size,
            log_r,
            log_s,
        });
        if !next_composition(&mut counts) {
            break;
        }
    }
    out.sort_by(|a, b| {
        b.log_ratio()
            .partial_cmp(&a.log_ratio())
            .unwrap_or(Ordering::Equal)
    });
    Ok(out)
}

/// Steps through all compositions of the total into `c.len()` parts; the
/// leading parts act as a bounded counter and the last one takes the rest.
fn next_composition(c: &mut [usize]) -> bool {
    let k = c.len();
    if k < 2 {
        return false;
    }
    let total: usize = c.iter().sum();
    let mut i = k - 1;
    while i > 0 {
        i -= 1;
        let head: usize = c[..k - 1].iter().sum();
        if head < total {
            c[i] += 1;
            c[k - 1] = total - head - 1;
            return true;
        }
        c[i] = 0;
    }
    false
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64))
        .exp()
        .round()
}

fn describe_counts(c: &[usize]) -> String {
    let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Smallest ln β over deterministic acceptance sets with `r^⊗N(A) >= 1 - ε`.
///
/// Exhaustive over per-type acceptance counts when that search space is
/// small, otherwise Neyman-Pearson order with a partial boundary type.
pub fn classical_beta(
    r: &ClassicalDistribution,
    s: &ClassicalDistribution,
    epsilon: f64,
    n: usize,
) -> Result<HypothesisTestResult> {
    validate_test(n, epsilon)?;
    let types = sorted_types(r, s, n)?;
    let space: f64 = types.iter().map(|t| t.size() + 1.0).product();
    if space <= EXACT_SEARCH_LIMIT {
        exact_beta(&types, epsilon, n)
    } else {
        greedy_beta(&types, epsilon, n)
    }
}

fn exact_beta(types: &[TypeClass], epsilon: f64, n: usize) -> Result<HypothesisTestResult> {
    let target = 1.0 - epsilon - COVERAGE_SLACK;
    let sizes: Vec<usize> = types.iter().map(|t| t.size() as usize).collect();
    let r_seq: Vec<f64> = types.iter().map(|t| t.log_r.exp()).collect();
    let s_seq: Vec<f64> = types.iter().map(|t| t.log_s.exp()).collect();
    let mut take = vec![0usize; types.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let r_mass: f64 = take.iter().zip(&r_seq).map(|(&m, &p)| m as f64 * p).sum();
        if r_mass >= target {
            let s_mass: f64 = take.iter().zip(&s_seq).map(|(&m, &p)| m as f64 * p).sum();
            if best.as_ref().is_none_or(|(b, _)| s_mass < *b) {
                best = Some((s_mass, take.clone()));
            }
        }
        // Mixed-radix increment.
        let mut i = 0;
        while i < take.len() {
            if take[i] < sizes[i] {
                take[i] += 1;
                break;
            }
            take[i] = 0;
            i += 1;
        }
        if i == take.len() {
            break;
        }
    }
    let (s_mass, take) =
        best.ok_or_else(|| Error::Numerical("no acceptance set reaches the coverage".into()))?;
    let chosen: Vec<String> = types
        .iter()
        .zip(&take)
        .filter(|(_, &m)| m > 0)
        .map(|(t, &m)| format!("{}x{}", m, describe_counts(&t.counts)))
        .collect();
    Ok(HypothesisTestResult::new(
        n,
        epsilon,
        s_mass.ln(),
        TestMethod::ExactEnumeration,
        format!("sequences per type: {}", chosen.join(" ")),
    ))
}

fn greedy_beta(types: &[TypeClass], epsilon: f64, n: usize) -> Result<HypothesisTestResult> {
    let target = 1.0 - epsilon - COVERAGE_SLACK;
    let mut r_acc = 0.0;
    let mut log_s = f64::NEG_INFINITY;
    for (idx, t) in types.iter().enumerate() {
        if t.log_r == f64::NEG_INFINITY {
            break;
        }
        let r_type = t.r_mass();
        if r_acc + r_type < target {
            r_acc += r_type;
            log_s = ln_add_exp(log_s, t.log_size + t.log_s);
            continue;
        }
        // Part of the boundary type: the fewest sequences closing the gap.
        let deficit = (target - r_acc).max(0.0);
        let log_m = if deficit == 0.0 {
            f64::NEG_INFINITY
        } else {
            deficit.ln() - t.log_r
        };
        let log_m = if log_m < 40.0 {
            (log_m.exp() - 1e-9).ceil().max(1.0).ln()
        } else {
            log_m
        };
        let log_m = log_m.min(t.log_size);
        log_s = ln_add_exp(log_s, log_m + t.log_s);
        return Ok(HypothesisTestResult::new(
            n,
            epsilon,
            log_s,
            TestMethod::NeymanPearsonGreedy,
            format!(
                "{idx} whole types with ln LR > {:.6}; boundary type {} with ln(count) {:.6} of {:.6}",
                t.log_ratio(),
                describe_counts(&t.counts),
                log_m,
                t.log_size
            ),
        ));
    }
    Err(Error::Numerical("coverage constraint not reached".into()))
}

/// Best test among `{ln(r/s) > τ}` acceptance sets made of whole types.
pub fn classical_threshold_beta(
    r: &ClassicalDistribution,
    s: &ClassicalDistribution,
    epsilon: f64,
    n: usize,
) -> Result<HypothesisTestResult> {
    validate_test(n, epsilon)?;
    let types = sorted_types(r, s, n)?;
    let target = 1.0 - epsilon - COVERAGE_SLACK;
    let mut r_acc = 0.0;
    let mut log_s = f64::NEG_INFINITY;
    let mut i = 0;
    while i < types.len() {
        // Types sharing a likelihood ratio enter together.
        let lr = types[i].log_ratio();
        if lr == f64::NEG_INFINITY {
            break;
        }
        let mut j = i;
        while j < types.len() && same_ratio(types[j].log_ratio(), lr) {
            r_acc += types[j].r_mass();
            log_s = ln_add_exp(log_s, types[j].log_size + types[j].log_s);
            j += 1;
        }
        if r_acc >= target {
            return Ok(HypothesisTestResult::new(
                n,
                epsilon,
                log_s,
                TestMethod::ThresholdFamily,
                format!("{j} whole types with ln LR >= {lr:.6}"),
            ));
        }
        i = j;
    }
    Err(Error::Numerical("coverage constraint not reached".into()))
}

pub(crate) fn same_ratio(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinRow {
    pub n: usize,
    pub epsilon: f64,
    pub log_beta: f64,
    pub rate: f64,
    /// `D(r‖s)` and `D(r‖s)/(1-ε)`.
    pub bound_low: f64,
    pub bound_high: f64,
}

pub const STEIN_CSV_HEADER: &str = "N,epsilon,log_beta,rate,bound_low,bound_high";

/// `-ln β / N` for each `N`, in the given order.
pub fn error_exponent_curve(
    r: &ClassicalDistribution,
    s: &ClassicalDistribution,
    epsilon: f64,
    ns: &[usize],
    mode: ExecMode,
) -> Result<Vec<SteinRow>> {
    let d = classical_relative_entropy(r, s)?.value;
    try_map_indexed(mode, ns.len(), |i| {
        let res = classical_beta(r, s, epsilon, ns[i])?;
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

pub fn render_stein_csv(rows: &[SteinRow]) -> String {
    let mut out = String::from(STEIN_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            r.n, r.epsilon, r.log_beta, r.rate, r.bound_low, r.bound_high
        ));
    }
    out
}
