//! Calculus of quantification on finite Boolean lattices.
//!
//! Measures and the sum rule, probability as a ratio of measures, the
//! divergence family of potentials, maximum-entropy assignment under linear
//! constraints, and computational labs for the associativity and functional
//! equation constructions that underpin them.

pub mod assoc;
pub mod decimal;
pub mod funceq;
pub mod inference;
pub mod lattice;
pub mod maxent;
pub mod potential;
pub mod valuation;
