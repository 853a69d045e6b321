use alloc::string::String;

use crate::plant::State;

/// Errors raised by configuration checks and numerical routines.
///
/// Physical failures of a closed loop (pendulum falling, cart leaving the
/// track) are outcomes of a run, not errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid plant parameters: {0}")]
    InvalidPlant(String),
    #[error("invalid controller configuration: {0}")]
    InvalidController(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),
    #[error("RK4 step from {from:?} with force {force} N and dt {dt} s left the finite range")]
    NonFiniteState { from: State, force: f64, dt: f64 },
    #[error("integration produced a non-finite state at step {step} (t = {time} s)")]
    IntegrationFailure { step: u64, time: f64 },
    #[error("Riccati solver did not converge after {iterations} iterations")]
    RiccatiNoConvergence { iterations: usize },
    #[error("Riccati solver failed: {0}")]
    RiccatiFailed(String),
    #[error("metrics need a non-empty time series")]
    EmptySeries,
}
