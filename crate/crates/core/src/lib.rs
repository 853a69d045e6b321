//! Nonlinear cart-pole simulation with cascade PID and LQR control.
//!
//! The crate is `no_std` (it needs `alloc` for time series and the scenario
//! catalog). Enable the `std` feature to get `std::error::Error` impls.
//!
//! Layout:
//!
//! - [`plant`]: equations of motion, RK4 stepping, linearization, energy.
//! - [`control`]: discrete PID, the position→angle→force cascade, the
//!   Riccati solver and the PID+LQR hybrid.
//! - [`hwemu`]: encoder/ultrasonic/PWM emulation of the bench rig and the
//!   embedded PID semantics used on it.
//! - [`scenario`], [`signal`], [`metrics`], [`catalog`], [`tune`]: closed-loop
//!   runs, transient metrics, the six named experiments and gain search.
//!
//! ```
//! use cartpole_core::catalog;
//! use cartpole_core::metrics::{compute_metrics, MetricsConfig};
//! use cartpole_core::scenario::run_scenario;
//!
//! let s1 = catalog::scenario("S1").unwrap();
//! let run = run_scenario(&s1).unwrap();
//! let m = compute_metrics(&run.series, &MetricsConfig::new(0.10)).unwrap();
//! assert!(m.settling_time.is_some());
//! ```
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod catalog;
pub mod control;
mod error;
pub mod hwemu;
pub mod metrics;
pub mod plant;
pub mod scenario;
pub mod signal;
pub mod tune;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = core::result::Result<T, E>;
