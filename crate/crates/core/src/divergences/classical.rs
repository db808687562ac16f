use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::tolerances;

use super::params::validate_alpha_z;
use super::DivergenceValue;

/// A probability vector on a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty distribution".into()));
        }
        if let Some(x) = probs.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "probabilities must be finite and non-negative, got {x}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tolerances().density_trace * probs.len() as f64 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Image under a column-stochastic matrix given as rows `P[out][in]`.
    pub fn push_forward(&self, stochastic: &[Vec<f64>]) -> Result<Self> {
        if stochastic.iter().any(|row| row.len() != self.len()) {
            return Err(Error::mismatch(
                "stochastic matrix columns",
                self.len(),
                "ragged",
            ));
        }
        let out: Vec<f64> = stochastic
            .iter()
            .map(|row| row.iter().zip(&self.probs).map(|(a, b)| a * b).sum())
            .collect();
        Self::new(out)
    }
}

impl TryFrom<Vec<f64>> for ClassicalDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ClassicalDistribution> for Vec<f64> {
    fn from(d: ClassicalDistribution) -> Self {
        d.probs
    }
}

fn check_len(r: &ClassicalDistribution, s: &ClassicalDistribution) -> Result<()> {
    if r.len() != s.len() {
        return Err(Error::mismatch("alphabet sizes", r.len(), s.len()));
    }
    Ok(())
}

/// Kullback-Leibler divergence `Σ r_i ln(r_i / s_i)`.
pub fn classical_relative_entropy(
    r: &ClassicalDistribution,
    s: &ClassicalDistribution,
) -> Result<DivergenceValue> {
    check_len(r, s)?;
    let mut acc = 0.0;
    for (&ri, &si) in r.probs.iter().zip(&s.probs) {
        if ri == 0.0 {
            continue;
        }
        if si == 0.0 {
            return Ok(DivergenceValue::infinite());
        }
        acc += ri * (ri.ln() - si.ln());
    }
    Ok(DivergenceValue::finite(acc))
}

/// Rényi divergence `(α-1)^{-1} ln Σ r_i^α s_i^{1-α}`.
pub fn classical_renyi(
    r: &ClassicalDistribution,
    s: &ClassicalDistribution,
    alpha: f64,
) -> Result<DivergenceValue> {
    validate_alpha_z(alpha, 1.0)?;
    check_len(r, s)?;
    let mut acc = 0.0;
    for (&ri, &si) in r.probs.iter().zip(&s.probs) {
        if ri == 0.0 {
            continue;
        }
        if si == 0.0 {
            if alpha > 1.0 {
                return Ok(DivergenceValue::infinite());
            }
            continue;
        }
        acc += ri.powf(alpha) * si.powf(1.0 - alpha);
    }
    if acc.is_nan() || acc <= 0.0 {
        return Ok(DivergenceValue::infinite());
    }
    Ok(DivergenceValue::finite(acc.ln() / (alpha - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64]) -> ClassicalDistribution {
        ClassicalDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn two_point_values() {
        let (r, s) = (dist(&[0.9, 0.1]), dist(&[0.1, 0.9]));
        let d = classical_relative_entropy(&r, &s).unwrap().value;
        assert!((d - 0.8 * 9f64.ln()).abs() < 1e-14);
        assert!((d - 1.75779).abs() < 2e-5);
        assert_eq!(classical_relative_entropy(&r, &r).unwrap().value, 0.0);
    }

    #[test]
    fn renyi_tends_to_kl() {
        let (r, s) = (dist(&[0.5, 0.3, 0.2]), dist(&[0.2, 0.2, 0.6]));
        let d = classical_relative_entropy(&r, &s).unwrap().value;
        for a in [1.0 - 1e-4, 1.0 + 1e-4] {
            assert!((classical_renyi(&r, &s, a).unwrap().value - d).abs() < 1e-3);
        }
    }

    #[test]
    fn support_rules() {
        let (r, s) = (dist(&[0.5, 0.5]), dist(&[1.0, 0.0]));
        assert!(!classical_relative_entropy(&r, &s).unwrap().is_finite());
        assert!(!classical_renyi(&r, &s, 2.0).unwrap().is_finite());
        assert!(classical_renyi(&r, &s, 0.5).unwrap().is_finite());
        assert!(classical_relative_entropy(&s, &r).unwrap().is_finite());
    }

    #[test]
    fn validation() {
        assert!(ClassicalDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ClassicalDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(ClassicalDistribution::new(vec![]).is_err());
        let d: ClassicalDistribution = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<ClassicalDistribution>("[0.25,0.7]").is_err());
    }

    #[test]
    fn garbling_does_not_increase() {
        let (r, s) = (dist(&[0.6, 0.3, 0.1]), dist(&[0.2, 0.5, 0.3]));
        let p = vec![vec![0.7, 0.2, 0.5], vec![0.3, 0.8, 0.5]];
        let (pr, ps) = (r.push_forward(&p).unwrap(), s.push_forward(&p).unwrap());
        let before = classical_relative_entropy(&r, &s).unwrap().value;
        let after = classical_relative_entropy(&pr, &ps).unwrap().value;
        assert!(after <= before + 1e-12);
    }
}
