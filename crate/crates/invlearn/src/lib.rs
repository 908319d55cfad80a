//! Learning over samplable distributions by inverting their samplers.
//!
//! The crate provides the building blocks for "indirect" learning: compose a
//! target function with the sampler of its input distribution, learn the
//! composition over the uniform distribution, then compose the learned
//! hypothesis with a distributional inverter that maps samples back to
//! sampler coins. Everything is measured with exact rational arithmetic
//! wherever enumeration is feasible, and with seeded Monte-Carlo estimates
//! beyond that.
//!
//! Module map:
//! - [`bits`]: bitstrings, truth tables, counted membership-query oracles.
//! - [`dist`]: dyadic biases, product distributions, samplers, exact output
//!   distributions.
//! - [`invert`]: rejection-sampling bit/product inverters and the
//!   distributional-inverter contract.
//! - [`learn`]: pluggable uniform-distribution learners.
//! - [`reduce`]: the composition reduction and composed hypotheses.
//! - [`amplify`]: direct products, truncating hashes, and the weak-to-strong
//!   to-distributional inversion chain.
//! - [`stats`]: exact statistical distance, error rates, and empirical
//!   distance estimates.

pub mod amplify;
pub mod bits;
pub mod dist;
pub mod error;
pub mod invert;
pub mod learn;
pub mod reduce;
pub mod rng;
pub mod stats;

pub use bits::{BitString, QueryOracle, Rational, TruthTable};
pub use error::{Error, Result};
