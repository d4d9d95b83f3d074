//! Benincasa–Dowker action of finite causal sets.
//!
//! Exact evaluation from interval abundances ([`action`]), a sampled
//! estimator over related pairs ([`sampling`]), and a gate-level model of the
//! Grover-counting algorithm: circuits ([`circuits`]), their simulation
//! ([`simulators`]) and the counting procedures ([`counting`]).

pub mod action;
pub mod bits;
pub mod causet;
pub mod circuits;
pub mod counting;
pub mod rng;
pub mod sampling;
pub mod simulators;

pub use action::{abundances, bd_action, bd_action_4d, AbundanceVector, ActionCoefficients, ActionError, Backend};
pub use bits::BitMatrix;
pub use causet::{generate, parse_text, to_text, CausalSet, CausetError, ClosureMode, GeneratorModel, TextStyle};
pub use circuits::{Circuit, CircuitError, Gate, ResourceReport};
pub use counting::{
    approx_count, approx_count_sqrt, estimate_bd_action, ActionReport, ActionRun, CountingError, CountingOracle,
    GroverModel, OracleMode,
};
pub use sampling::{SampleResult, SampledEstimate, SamplingError};
pub use simulators::SimError;

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Causet(#[from] CausetError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Counting(#[from] CountingError),
}
