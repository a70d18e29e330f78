//! Exact Kloosterman sums over GF(2^m) and exhaustive checks of the
//! solution counts and mod-12 congruences built on them.
//!
//! - [`field`]: GF(2^m) arithmetic, trace, quadratic solving.
//! - [`ksum`]: K(a) singly and as whole-field tables.
//! - [`goethals`]: three routes to the solution count μ2(b, c).
//! - [`verify`]: sweeps that turn the above into reports.
//! - [`cli`]: the `kloos` command line.

pub mod cli;
pub mod field;
pub mod goethals;
pub mod ksum;
pub mod verify;

pub use field::{FieldElement, FieldError, FieldSpec, QuadraticRoots};
pub use goethals::{Mu2Table, Rational, SystemParams};
pub use ksum::KloostermanTable;
pub use verify::{VerificationReport, Violation};
