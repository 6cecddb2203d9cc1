//! Simulation engine and analytics toolkit for SI/SIR epidemics on evolving
//! random graphs.
//!
//! The library has five parts:
//!
//! * [`dist`] — degree distributions, their moments and generating functions,
//!   and the closed-form epidemic quantities derived from them (critical
//!   values, outbreak probabilities, final-size limits, the phase-transition
//!   discriminant).
//! * [`graph`] — configuration-model and Erdős–Rényi multigraphs with
//!   explicit half-edge identity and the rewiring primitive used by all
//!   evolving models.
//! * [`coupling`] — a deterministic, counter-based source of shared edge
//!   clocks so that different model variants can be run on identical
//!   randomness and compared pathwise.
//! * [`engine`] — event-driven simulation of the model variants on static
//!   graphs, the dynamic reveal-as-you-go half-edge construction, and
//!   replicated outbreak estimation.
//! * [`oracles`] — independent brute-force reference computations
//!   (percolation, exhaustive enumeration, exploration walks, branching
//!   process Monte Carlo) used to validate everything else.

pub mod coupling;
pub mod dist;
pub mod engine;
pub mod graph;
pub mod indexed;
pub mod oracles;
pub mod rng;
pub mod verify;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("always subcritical: {0}")]
    AlwaysSubcritical(String),
    #[error("graph invariant violated: {0}")]
    GraphInvariant(String),
    #[error("bad graph file: {0}")]
    GraphFormat(String),
    #[error("stale edge handle: {0}")]
    StaleEdge(u32),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
