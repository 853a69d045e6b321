//! Position → angle → force cascade.
//!
//! Both loops are reverse-acting: the error fed to each PID is
//! `measurement − setpoint`. With the plant's sign convention (positive angle
//! leans toward +x) this is what makes the positive angle gains and negative
//! position gains of the reference tuning stabilizing. A positive cart
//! command therefore produces a positive angle setpoint: the rod is asked to
//! lean toward the target, and the cart first backs away to create that lean.

use super::pid::{pid_update, PidGains, PidMemory};
use crate::{Error, Result};

/// Default clamp on the outer-loop output, about 20°.
pub const DEFAULT_ANGLE_SETPOINT_LIMIT: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeConfig {
    /// Position error (m) → angle setpoint (rad).
    pub position: PidGains,
    /// Angle error (rad) → cart force (N).
    pub angle: PidGains,
    pub angle_setpoint_limit: f64,
}

impl CascadeConfig {
    pub fn new(position: PidGains, angle: PidGains, angle_setpoint_limit: f64) -> Result<Self> {
        let cfg = Self {
            position,
            angle,
            angle_setpoint_limit,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.position.validate()?;
        self.angle.validate()?;
        if !(self.angle_setpoint_limit > 0.0) {
            return Err(Error::InvalidController(
                "angle setpoint limit must be positive".into(),
            ));
        }
        outer_divider(self.angle.ts, self.position.ts).map(|_| ())
    }

    /// Inner samples per outer sample.
    pub fn outer_divider(&self) -> u64 {
        outer_divider(self.angle.ts, self.position.ts).unwrap_or(1)
    }
}

/// Number of inner periods per outer period; the outer loop may not be
/// faster than the inner one and must be an integer multiple of it.
pub(crate) fn outer_divider(inner_ts: f64, outer_ts: f64) -> Result<u64> {
    let ratio = outer_ts / inner_ts;
    let n = libm::round(ratio);
    if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
        return Err(Error::InvalidController(
            "outer loop period must be an integer multiple (>= 1) of the inner period".into(),
        ));
    }
    Ok(n as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CascadeMemory {
    pub position: PidMemory,
    pub angle: PidMemory,
    /// Held outer-loop output.
    pub angle_setpoint: f64,
    /// Inner samples taken so far.
    pub ticks: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeOutput {
    pub force: f64,
    pub angle_setpoint: f64,
}

/// One inner-loop sample. The outer loop runs on every
/// [`CascadeConfig::outer_divider`]-th call and holds its output in between.
pub fn cascade_step(
    cfg: &CascadeConfig,
    mem: &CascadeMemory,
    x_ref: f64,
    x_meas: f64,
    theta_meas: f64,
) -> Result<(CascadeOutput, CascadeMemory)> {
    let mut next = *mem;
    if mem.ticks.is_multiple_of(cfg.outer_divider()) {
        next.angle_setpoint = outer_update(
            &cfg.position,
            cfg.angle_setpoint_limit,
            &mut next.position,
            x_ref,
            x_meas,
        )?;
    }
    let (force, angle) = pid_update(&cfg.angle, &mem.angle, theta_meas - next.angle_setpoint)?;
    next.angle = angle;
    next.ticks += 1;
    Ok((
        CascadeOutput {
            force,
            angle_setpoint: next.angle_setpoint,
        },
        next,
    ))
}

/// Outer position loop shared by the PID and LQR cascades.
pub(crate) fn outer_update(
    gains: &PidGains,
    limit: f64,
    mem: &mut PidMemory,
    x_ref: f64,
    x_meas: f64,
) -> Result<f64> {
    if !x_ref.is_finite() || !x_meas.is_finite() {
        return Err(Error::NonFinite("position loop"));
    }
    let (raw, m) = pid_update(gains, mem, x_meas - x_ref)?;
    *mem = m;
    Ok(raw.clamp(-limit, limit))
}
