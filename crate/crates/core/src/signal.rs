//! Piecewise-constant signals for references and disturbances.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Breakpoints `(start_time, value)`; the value holds until the next
/// breakpoint and the signal is 0 before the first one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Signal {
    segments: Vec<(f64, f64)>,
}

impl Signal {
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self> {
        if segments
            .iter()
            .any(|(t, v)| !t.is_finite() || !v.is_finite())
        {
            return Err(Error::InvalidSignal("breakpoints must be finite".into()));
        }
        if segments.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidSignal(
                "start times must be strictly increasing".into(),
            ));
        }
        Ok(Self { segments })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn step(at: f64, value: f64) -> Self {
        Self {
            segments: alloc::vec![(at, value)],
        }
    }

    /// `amplitude` on `[start, end)`, zero elsewhere.
    pub fn pulse(start: f64, end: f64, amplitude: f64) -> Result<Self> {
        Self::new(alloc::vec![(start, amplitude), (end, 0.0)])
    }

    pub fn value_at(&self, t: f64) -> f64 {
        // Index of the first breakpoint strictly after t.
        let idx = self.segments.partition_point(|(start, _)| *start <= t);
        if idx == 0 {
            0.0
        } else {
            self.segments[idx - 1].1
        }
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    /// Value after the last breakpoint.
    pub fn final_value(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.1)
    }

    /// Replaces the value of the last breakpoint (the final command of a
    /// reference).
    pub fn with_final_value(mut self, value: f64) -> Self {
        match self.segments.last_mut() {
            Some(last) => last.1 = value,
            None => self.segments.push((0.0, value)),
        }
        self
    }

    /// Rescales the levels so the largest magnitude equals `amplitude`.
    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        let peak = self.segments.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
        if peak > 0.0 {
            for s in &mut self.segments {
                s.1 *= amplitude / peak;
            }
        }
        self
    }
}
