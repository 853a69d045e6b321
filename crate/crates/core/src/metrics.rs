//! Step-response metrics for the cart position and pendulum angle.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Full trace of a run, one entry per integration step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub theta_sp: Vec<f64>,
    pub force: Vec<f64>,
    pub disturbance: Vec<f64>,
    pub measured_x: Vec<f64>,
    pub measured_theta: Vec<f64>,
}

/// One row of a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub theta: f64,
    pub omega: f64,
    pub theta_sp: f64,
    pub force: f64,
    pub disturbance: f64,
    pub measured_x: f64,
    pub measured_theta: f64,
}

impl TimeSeries {
    pub fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            t: v(),
            x: v(),
            v: v(),
            theta: v(),
            omega: v(),
            theta_sp: v(),
            force: v(),
            disturbance: v(),
            measured_x: v(),
            measured_theta: v(),
        }
    }

    pub fn push(&mut self, s: Sample) {
        self.t.push(s.t);
        self.x.push(s.x);
        self.v.push(s.v);
        self.theta.push(s.theta);
        self.omega.push(s.omega);
        self.theta_sp.push(s.theta_sp);
        self.force.push(s.force);
        self.disturbance.push(s.disturbance);
        self.measured_x.push(s.measured_x);
        self.measured_theta.push(s.measured_theta);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            t: self.t[i],
            x: self.x[i],
            v: self.v[i],
            theta: self.theta[i],
            omega: self.omega[i],
            theta_sp: self.theta_sp[i],
            force: self.force[i],
            disturbance: self.disturbance[i],
            measured_x: self.measured_x[i],
            measured_theta: self.measured_theta[i],
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..self.len()).map(|i| self.sample(i))
    }
}

/// What the metrics are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    /// Final cart reference, m.
    pub reference: f64,
    /// Settling band as a fraction of the reference (0.02 = ±2%).
    pub band: f64,
    /// Force magnitude counted as saturated, N.
    pub force_limit: f64,
    pub track_half_length: Option<f64>,
}

impl MetricsConfig {
    pub fn new(reference: f64) -> Self {
        Self {
            reference,
            band: 0.02,
            force_limit: 12.0,
            track_half_length: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Forward peak beyond the command, % of step height. `None` for a
    /// zero-height step.
    pub percent_overshoot: Option<f64>,
    /// Largest excursion opposite to the commanded direction, m.
    pub undershoot: f64,
    /// Largest |θ|, degrees.
    pub peak_angle_deg: f64,
    /// Time from the first sample until the cart stays inside the band.
    /// `None` when the last sample is still outside.
    pub settling_time: Option<f64>,
    /// 10% → 90% of the step, `None` if either crossing never happens.
    pub rise_time: Option<f64>,
    pub steady_state_error: f64,
    pub max_abs_x: f64,
    pub peak_abs_force: f64,
    /// Percentage of samples with |force| at the limit.
    pub saturation_duty: f64,
    pub track_violation: bool,
}

/// Computes step metrics; the step runs from the first sample's position to
/// `cfg.reference` and time is measured from the first sample.
pub fn compute_metrics(series: &TimeSeries, cfg: &MetricsConfig) -> Result<Metrics> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let t0 = series.t[0];
    let x0 = series.x[0];
    let r = cfg.reference;
    let height = r - x0;
    let direction = if height == 0.0 { 0.0 } else { height.signum() };
    // Signed progress toward the target, 0 at start and `|height|` on target.
    let progress = |x: f64| (x - x0) * direction;

    let percent_overshoot = (height != 0.0).then(|| {
        let peak = series
            .x
            .iter()
            .map(|&x| progress(x))
            .fold(f64::NEG_INFINITY, f64::max);
        (100.0 * (peak - height.abs()) / height.abs()).max(0.0)
    });
    let undershoot = if direction == 0.0 {
        0.0
    } else {
        series.x.iter().map(|&x| -progress(x)).fold(0.0, f64::max)
    };

    let half_width = cfg.band * if r != 0.0 { r.abs() } else { height.abs() };
    let last_outside = series.x.iter().rposition(|&x| (x - r).abs() > half_width);
    let settling_time = match last_outside {
        None => Some(0.0),
        Some(i) if i + 1 < series.len() => Some(series.t[i + 1] - t0),
        Some(_) => None,
    };

    let rise_time = (height != 0.0)
        .then(|| {
            let first_at = |fraction: f64| {
                series
                    .x
                    .iter()
                    .position(|&x| progress(x) >= fraction * height.abs())
                    .map(|i| series.t[i])
            };
            Some(first_at(0.9)? - first_at(0.1)?)
        })
        .flatten();

    let max_abs = |v: &[f64]| v.iter().map(|a| a.abs()).fold(0.0, f64::max);
    let saturated = series
        .force
        .iter()
        .filter(|f| f.abs() >= cfg.force_limit * (1.0 - 1e-9))
        .count();
    let max_abs_x = max_abs(&series.x);

    Ok(Metrics {
        percent_overshoot,
        undershoot,
        peak_angle_deg: max_abs(&series.theta).to_degrees(),
        settling_time,
        rise_time,
        steady_state_error: (series.x[series.len() - 1] - r).abs(),
        max_abs_x,
        peak_abs_force: max_abs(&series.force),
        saturation_duty: 100.0 * saturated as f64 / series.len() as f64,
        track_violation: cfg.track_half_length.is_some_and(|h| max_abs_x > h),
    })
}

/// Time after `from` at which `|signal|` enters `[0, bound]` for good,
/// measured from `from`. `None` if it is still outside at the end.
pub fn time_to_stay_within(t: &[f64], signal: &[f64], from: f64, bound: f64) -> Option<f64> {
    let start = t.partition_point(|&ti| ti < from);
    match (start..t.len()).rev().find(|&i| signal[i].abs() > bound) {
        None => Some(0.0),
        Some(i) if i + 1 < t.len() => Some(t[i + 1] - from),
        Some(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    /// Closed-form unit-step response of ω²/(s² + 2ζωs + ω²).
    fn second_order(zeta: f64, wn: f64, height: f64, dt: f64, duration: f64) -> TimeSeries {
        let mut ts = TimeSeries::default();
        let n = (duration / dt) as usize;
        for k in 0..=n {
            let t = k as f64 * dt;
            let y = if zeta < 1.0 {
                let wd = wn * libm::sqrt(1.0 - zeta * zeta);
                let phi = libm::acos(zeta);
                1.0 - libm::exp(-zeta * wn * t) * libm::sin(wd * t + phi)
                    / libm::sqrt(1.0 - zeta * zeta)
            } else {
                1.0 - (1.0 + wn * t) * libm::exp(-wn * t)
            };
            ts.push(Sample {
                t,
                x: height * y,
                ..Default::default()
            });
        }
        ts
    }

    #[test]
    fn critically_damped_has_no_overshoot() {
        let ts = second_order(1.0, 2.0, 0.1, 1e-3, 15.0);
        let m = compute_metrics(&ts, &MetricsConfig::new(0.1)).unwrap();
        assert_eq!(m.percent_overshoot, Some(0.0));
        assert_eq!(m.undershoot, 0.0);
    }

    #[test]
    fn underdamped_overshoot_matches_formula() {
        for zeta in [0.3, 0.5, 0.7] {
            let ts = second_order(zeta, 3.0, 0.1, 1e-3, 20.0);
            let m = compute_metrics(&ts, &MetricsConfig::new(0.1)).unwrap();
            let expected = 100.0 * libm::exp(-PI * zeta / libm::sqrt(1.0 - zeta * zeta));
            assert!(
                (m.percent_overshoot.unwrap() - expected).abs() < 0.5,
                "zeta {zeta}"
            );
        }
    }

    #[test]
    fn settling_of_first_order_lag() {
        // 1 − e^{−t}: inside ±2% from t = ln 50.
        let mut ts = TimeSeries::default();
        for k in 0..=10_000 {
            let t = k as f64 * 1e-3;
            ts.push(Sample {
                t,
                x: 1.0 - libm::exp(-t),
                ..Default::default()
            });
        }
        let m = compute_metrics(&ts, &MetricsConfig::new(1.0)).unwrap();
        assert_relative_eq!(m.settling_time.unwrap(), libm::log(50.0), epsilon = 1.1e-3);
        // 10%→90% of a first-order lag is ln 9.
        assert_relative_eq!(m.rise_time.unwrap(), libm::log(9.0), epsilon = 2e-3);
    }

    #[test]
    fn constant_trace_at_reference() {
        let mut ts = TimeSeries::default();
        for k in 0..3 {
            ts.push(Sample {
                t: k as f64,
                x: 0.1,
                ..Default::default()
            });
        }
        let m = compute_metrics(&ts, &MetricsConfig::new(0.1)).unwrap();
        assert_eq!(m.percent_overshoot, None);
        assert_eq!(m.settling_time, Some(0.0));
    }

    #[test]
    fn never_settling_is_reported() {
        let mut ts = TimeSeries::default();
        for k in 0..10 {
            ts.push(Sample {
                t: k as f64,
                x: 0.01 * k as f64,
                ..Default::default()
            });
        }
        let m = compute_metrics(&ts, &MetricsConfig::new(1.0)).unwrap();
        assert_eq!(m.settling_time, None);
        assert!(compute_metrics(&TimeSeries::default(), &MetricsConfig::new(1.0)).is_err());
    }

    #[test]
    fn undershoot_and_track_flag() {
        let xs = [0.0, -0.03, -0.01, 0.05, 0.104, 0.1, 0.1];
        let mut ts = TimeSeries::default();
        for (k, x) in xs.iter().enumerate() {
            ts.push(Sample {
                t: k as f64,
                x: *x,
                force: if k == 1 { -12.0 } else { 1.0 },
                ..Default::default()
            });
        }
        let mut cfg = MetricsConfig::new(0.1);
        cfg.track_half_length = Some(0.1);
        let m = compute_metrics(&ts, &cfg).unwrap();
        assert_relative_eq!(m.undershoot, 0.03);
        assert_relative_eq!(m.percent_overshoot.unwrap(), 4.0, epsilon = 1e-9);
        assert!(m.track_violation);
        assert_relative_eq!(m.saturation_duty, 100.0 / 7.0);
        assert_eq!(m.settling_time, Some(5.0));
    }

    #[test]
    fn stay_within_helper() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let s = [5.0, 0.5, 2.0, 0.1, 0.0];
        assert_eq!(time_to_stay_within(&t, &s, 1.0, 1.0), Some(2.0));
        assert_eq!(time_to_stay_within(&t, &s, 3.0, 1.0), Some(0.0));
        assert_eq!(
            time_to_stay_within(&t, &[0.0, 0.0, 0.0, 0.0, 3.0], 0.0, 1.0),
            None
        );
    }
}
