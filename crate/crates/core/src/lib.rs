//! Large-deviation approximations for `P(Y_n > x)`, where `Y_n` sums `n`
//! i.i.d. heavy-tailed jumps censored at a level `M`, together with a
//! stratified Monte Carlo estimator and the validation battery that checks
//! one against the other.

// Frozen reference values are quoted to every published digit, and
// `!(a < b)` style guards are kept so that NaN inputs are rejected too.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod simulation;
pub mod special;
pub mod validation;
