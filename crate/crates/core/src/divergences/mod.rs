//! Divergences and trace functionals.

mod classical;
mod functionals;
mod params;
mod quantum;

use serde::{Deserialize, Serialize};

pub use classical::{classical_relative_entropy, classical_renyi, ClassicalDistribution};
pub use functionals::{hiai_functional, psi, psi_block_embedding, psi_on_spectra, upsilon};
pub use params::ParamPoint;
pub use quantum::{bs_entropy, d_alpha_z, d_renyi, d_sandwiched, umegaki, von_neumann_entropy};

/// A divergence in nats, or a declared `+∞` on a support violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub finite: bool,
}

impl DivergenceValue {
    pub fn finite(value: f64) -> Self {
        Self {
            value,
            finite: true,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            finite: false,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// The finite value, or `None` for a support violation.
    pub fn get(&self) -> Option<f64> {
        self.finite.then_some(self.value)
    }
}
