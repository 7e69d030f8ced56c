//! Certified lower bounds for the growth rate of 1324-avoiding permutations.
//!
//! The pipeline: enumerate small tree/forest shapes, embed them as point
//! sequences, count 1324-avoiding interleavings exactly (the Q table), then
//! feed the logarithms into a weighted asymptotic functional maximized over
//! two real parameters. Every analytic shortcut has an exhaustive
//! counterpart in [`checks`] and the test suite.

pub mod asymptotics;
pub mod checks;
pub mod combinatorics;
pub mod error;
pub mod lukasiewicz;
pub mod oracle;
pub mod patterns;
pub mod qtable;
pub mod series;

pub use error::{Error, Result};
