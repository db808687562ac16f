//! Convexity phase diagram, randomized probes, counterexample search and
//! identity checks.

mod classify;
mod counterexample;
mod equivalence;
mod identities;
mod probe;
mod suites;
mod sweep;

pub use classify::{classify, classify_upsilon, normalize, Direction, RegionKind, RegionLabel};
pub use counterexample::{
    counterexample_psi, counterexample_upsilon, CounterexampleConfig, CounterexampleReport,
};
pub use equivalence::{monotonicity_equivalence_demo, EquivalenceReport};
pub use identities::{
    integral_representation, variational_objective, verify_integral_representation,
    verify_lieb_thirring, verify_variational, VariationalReport,
};
pub use probe::{
    dpi_channel, probe_dpi, probe_joint, probe_line_second_difference, verify_opconv, DpiConfig,
    JointFunctional, KChoice, LineProbe, ProbeConfig, ProbeReport, Witness,
};
pub use suites::{run_suite, CheckResult, Suite, SuiteReport};
pub use sweep::{
    point_seed, probe_direction, render_csv, run_sweep, sweep_point, Axis, GridSpec, SweepConfig,
    SweepRow, CSV_HEADER,
};
