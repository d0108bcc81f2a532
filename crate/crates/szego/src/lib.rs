//! Truncated Wiener-Hopf operators and their Szego-type trace asymptotics.
//!
//! The crate builds dense discretizations of spatially truncated
//! pseudo-differential operators with smooth symbols, evaluates the
//! boundary coefficients that govern the large-scale behaviour of
//! `tr[f(W) - W(f.a)]` by principal-value quadrature, and drives the
//! scaling experiments (coefficient vs. spectral trace, entanglement
//! entropy of free-fermion states) that tie the two together.

pub mod coeffs;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod operators;
pub mod quad;
pub mod symbols;
pub mod testfuncs;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
