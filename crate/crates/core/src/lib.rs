//! Exact state-vector simulation of constrained adiabatic optimization.
//!
//! The crate covers the whole pipeline: encoding constrained binary problems
//! ([`problems`]), the composite qubit/slack-qudit space and matrix-free
//! operator kernels ([`hilbert`]), time-dependent Hamiltonians for Q-CHOP and
//! the penalty-based adiabatic baseline ([`hamiltonians`]), adaptive
//! Schrödinger integration ([`evolve`]) and the benchmark observables
//! ([`metrics`]). The [`cli`] module drives experiments end to end.

pub mod cli;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod hamiltonians;
pub mod hilbert;
pub mod metrics;
pub mod problems;

pub use error::{Error, Result};
