//! Exact q-expansion machinery for Eisenstein classes on modular curves: cyclotomic
//! coefficients, truncated Puiseux q-series, theta and Siegel units, distribution and
//! moment checks, and the finite-level pieces of an explicit reciprocity computation.

pub mod arith;
pub mod cyclotomic;
pub mod distribution;
pub mod eisenstein;
pub mod error;
pub mod moments;
pub mod oracle;
pub mod product;
pub mod qseries;
pub mod reciprocity;
pub mod report;
pub mod suites;
pub mod tadic;
pub mod tower;

pub use cyclotomic::CycNumber;
pub use error::{Error, Result};
pub use qseries::QExpansion;
