//! Associativity constructions: exact grid valuations over a surd basis,
//! interval narrowing for a new atom, and the minimality counterexamples.

mod axioms;
mod grid;
mod narrow;
mod surd;

use thiserror::Error;

pub use axioms::{axiom_check, AxiomOutcome, AxiomReport, AxiomWitness, OpTable};
pub use grid::{
    classify, combo_value, compare_points, format_combo, grid_value, repetition_check, type_letter,
    Class, GridPoint,
};
pub use narrow::{
    interval_table, interval_table_with, narrow_delta, narrow_delta_with, Bracket,
    ComparatorOracle, DeltaBounds, DeltaOracle, NarrowOptions, Narrowing, Side, Witness,
};
pub use surd::{SurdParseError, SurdValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssocError {
    #[error("expected {expected} multiplicities, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("value must be strictly positive: {0}")]
    NonPositive(String),
    #[error("basis must contain at least one atom value")]
    EmptyBasis,
    #[error("max_u and every u must be at least 1")]
    InvalidMaxU,
    #[error("jobs must be at least 1")]
    InvalidJobs,
    #[error("target grid point must contain at least one new atom")]
    NoNewAtoms,
    #[error("repetition count must be at least 1")]
    InvalidRepetition,
    #[error("unbounded: {0}")]
    Unbounded(Side),
    #[error("need at least 3 distinct samples, got {0}")]
    TooFewSamples(usize),
    #[error("pair ({0}, {1}) is outside the sampled table")]
    OutsideTable(f64, f64),
    #[error("sample {0} is not finite")]
    NonFinite(f64),
    #[error(transparent)]
    Parse(#[from] SurdParseError),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}
