//! Controllers: discrete PID, the PID cascade, and LQR via the Riccati
//! equation.

pub mod care;
pub mod cascade;
pub mod lqr;
pub mod pid;

pub use cascade::{cascade_step, CascadeConfig, CascadeMemory, CascadeOutput};
pub use lqr::{
    hybrid_step, lqr_gain, HybridConfig, HybridMemory, LqrConfig, LqrFeedback, LqrWeights,
};
pub use pid::{pid_step, pid_update, PidGains, PidMemory};
