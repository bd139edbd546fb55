//! Analysis of power series that converge on the whole real line.
//!
//! * [`series`] — coefficient rules, certified evaluation, norms, head recovery
//! * [`turan`] — Turán profiles, `ϑ(χ)`/`ψ(χ)`, sign runs, term envelopes,
//!   threshold solvers
//! * [`certify`] — re-checkable unboundedness certificates
//! * [`shift`] — backward shift, left extension, Peano membership, resolvent
//! * [`topology`] — ℓ¹ / sup / compact-open comparisons and counterexamples
//! * [`bell`] — complementary Bell numbers
//!
//! All arithmetic is arbitrary precision with the precision passed
//! explicitly; enclosures are rigorous (outward rounding).

pub mod bell;
pub mod certify;
pub mod error;
pub mod num;
pub mod series;
pub mod shift;
pub mod topology;
pub mod turan;

pub use error::{Error, Result};
pub use num::{BigComplex, CInterval, CRational, Interval, DEFAULT_PRECISION};
pub use series::{Coeff, Rho, Rule, SeriesSpec, SignRule};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
