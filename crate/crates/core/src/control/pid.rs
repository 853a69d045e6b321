//! Discrete parallel-form PID.
//!
//! The integral advances by forward Euler and is clamped to the output range.
//! The derivative is `kd·N·s/(s+N)` discretized by backward Euler:
//!
//! ```text
//! d[k] = (d[k-1] + kd·N·(e[k] − e[k-1])) / (1 + N·ts)
//! ```
//!
//! With `filter_n = 0` the derivative is the plain difference `kd·Δe/ts`.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Derivative filter coefficient N in 1/s; 0 disables the filter.
    pub filter_n: f64,
    pub out_min: f64,
    pub out_max: f64,
    /// Sample period in seconds.
    pub ts: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64, filter_n: f64, limit: f64, ts: f64) -> Result<Self> {
        let g = Self {
            kp,
            ki,
            kd,
            filter_n,
            out_min: -limit,
            out_max: limit,
            ts,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.kp, self.ki, self.kd, self.filter_n, self.ts]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidController("PID gains must be finite".into()));
        }
        if !(self.out_min < self.out_max) {
            return Err(Error::InvalidController("PID output range is empty".into()));
        }
        if !(self.ts > 0.0) {
            return Err(Error::InvalidController(
                "PID sample period must be positive".into(),
            ));
        }
        if self.filter_n < 0.0 {
            return Err(Error::InvalidController(
                "derivative filter coefficient must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn saturate(&self, u: f64) -> f64 {
        u.clamp(self.out_min, self.out_max)
    }
}

/// Values carried between PID samples. Start from `PidMemory::default()`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidMemory {
    pub integral: f64,
    pub derivative: f64,
    pub prev_error: f64,
    pub prev_output: f64,
}

/// One sample with `e = setpoint − measurement`.
pub fn pid_step(
    g: &PidGains,
    mem: &PidMemory,
    setpoint: f64,
    measurement: f64,
) -> Result<(f64, PidMemory)> {
    if !setpoint.is_finite() || !measurement.is_finite() {
        return Err(Error::NonFinite("pid_step"));
    }
    pid_update(g, mem, setpoint - measurement)
}

/// One sample on an already formed error signal.
pub fn pid_update(g: &PidGains, mem: &PidMemory, error: f64) -> Result<(f64, PidMemory)> {
    if !error.is_finite() {
        return Err(Error::NonFinite("pid_update"));
    }
    let integral = g.saturate(mem.integral + g.ki * error * g.ts);
    let derivative = if g.filter_n > 0.0 {
        (mem.derivative + g.kd * g.filter_n * (error - mem.prev_error)) / (1.0 + g.filter_n * g.ts)
    } else {
        g.kd * (error - mem.prev_error) / g.ts
    };
    let output = g.saturate(g.kp * error + integral + derivative);
    Ok((
        output,
        PidMemory {
            integral,
            derivative,
            prev_error: error,
            prev_output: output,
        },
    ))
}
