//! Simulation and certification toolkit for majority-vote probabilistic
//! cellular automata on a periodic square lattice.
//!
//! Four parts: a keyed-randomness lattice simulator ([`grid`], [`sim`]),
//! a model catalog with shrinking-range schedules ([`model`]), a
//! density-map analysis of the infinite-range limit ([`meanfield`]), and
//! a combinatorial pipeline that certifies non-ergodicity at small error
//! rates ([`bounds`]).
//!
//! Every random variate in the simulator is a pure function of
//! `(seed, step, cell, draw index)`, so any run is bit-reproducible
//! regardless of thread count or evaluation order.

use thiserror::Error;

pub mod bounds;
pub mod grid;
pub mod meanfield;
pub mod model;
pub mod par;
pub mod rng;
pub mod sim;

pub use bounds::{certify_nonergodic, mc_minus_estimate, theorem_bound, BoundParams, Certificate, McEstimate};
pub use grid::{Spin, SpinGrid};
pub use model::{build_model, ModelConfig, ModelName, ModelSpec, NeighborSampler, RangeSchedule, ScheduleKind};
pub use sim::{late_mean, majority_of, run, step, step_seq, RunResult, UpdateParams};

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter or configuration rejected by validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An enumeration was asked to exceed its hard budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    /// An inequality required by the bound pipeline does not hold.
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    /// Two routes that must agree did not.
    #[error("consistency failure: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
