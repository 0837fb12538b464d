//! Symbolic exterior calculus for evolutionary skew-symmetric forms.
//!
//! The crate is layered bottom-up:
//!
//! - [`symexpr`]: exact scalar expressions (rational polynomials with opaque
//!   transcendental atoms), differentiation, substitution and zero-testing.
//! - [`forms`]: skew-symmetric forms, wedge, flat exterior derivative, Hodge
//!   star, pullback to coordinate pseudostructures and the homotopy
//!   antiderivative.
//! - [`geometry`]: connections, torsion and the two-term commutator of an
//!   evolutionary form.
//! - [`relations`]: closure tests, pseudostructure search, identical and
//!   nonidentical relations, sequential integration, degeneracy indicators,
//!   canonical transformations and structure classification.
//! - [`balance`]: balance-law front end and equilibrium diagnosis.

pub mod balance;
mod error;
pub mod forms;
pub mod geometry;
pub mod relations;
pub mod symexpr;
pub mod testing;

pub use error::{Error, Result};
pub use symexpr::{Chart, Confidence, Expr, Func, Rational, Sampler, Verdict};
