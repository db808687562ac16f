//! Neyman-Pearson error exponents: exact classical type counting and the
//! quantum projection family at small N.

mod bs;
mod classical;
mod quantum;

pub use crate::divergences::ClassicalDistribution;
pub use bs::{bs_gap_report, BsGapReport, GAP_THRESHOLD, NONCOMMUTING_THRESHOLD};
pub use classical::{
    classical_beta, classical_threshold_beta, error_exponent_curve, render_stein_csv,
    HypothesisTestResult, SteinRow, TestMethod, STEIN_CSV_HEADER,
};
pub use quantum::{
    quantum_beta_np_family, quantum_beta_with_route, quantum_rate_curve, QuantumRoute,
    MAX_TOTAL_DIM,
};
