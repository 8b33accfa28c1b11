//! radbound: a verification engine for moment and concentration bounds on
//! zero-sum Rademacher sums, hypergeometric counts, and functions on the
//! permutation group.
//!
//! Every checker produces a [`report::BoundReport`]: both sides of one
//! inequality instance, the slack, and a verdict. Wherever the quantities are
//! rational (weights given as exact rationals, integer moment orders), the
//! verdict comes from exact big-rational comparison; square roots are handled
//! by squaring, pi by directed rational bounds. Floating point enters only
//! where a quantity is genuinely transcendental, and Monte-Carlo estimates
//! are always labelled as such and never produce "violated" verdicts on
//! their own.

pub mod combinatorics;
pub mod concentration;
pub mod error;
pub mod hypergeometric;
pub mod moments;
pub mod numeric;
pub mod permutation;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
