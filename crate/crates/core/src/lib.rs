//! Numerical laboratory for quantum divergences and the joint convexity of
//! trace functionals.
//!
//! - [`matrix`]: dense complex linear algebra, Jacobi eigensolver, spectral
//!   calculus, tensor products, partial traces and seeded random ensembles.
//! - [`divergences`]: the α-z Rényi family, Umegaki and Belavkin-Staszewski
//!   relative entropies, and the trace functionals `Ψ_{p,q,s}` and `Υ_{p,s}`.
//! - [`channels`]: CPTP maps in Kraus form, Stinespring dilations and the
//!   Haar twirl on a tensor factor.
//! - [`lab`]: the convexity phase diagram as an executable classifier,
//!   randomized convexity and data-processing probes, counterexample search,
//!   identity checks and parameter sweeps.
//! - [`stein`]: Neyman-Pearson error exponents for classical and quantum
//!   hypothesis testing.

pub mod channels;
pub mod divergences;
pub mod error;
pub mod exec;
pub mod lab;
pub mod matrix;
pub mod rng;
pub mod stein;
pub mod tolerance;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use tolerance::{tolerances, Tolerances};
