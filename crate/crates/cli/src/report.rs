//! Human-readable run reports.

use std::fmt;

use cartpole_core::metrics::{
    compute_metrics, time_to_stay_within, Metrics, MetricsConfig, TimeSeries,
};
use cartpole_core::scenario::Outcome;
use cartpole_core::tune::TuningSpec;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: Option<f64>,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub outcome: Outcome,
    pub metrics: Metrics,
    /// Only present when a spec was supplied.
    pub checks: Option<Vec<Check>>,
}

/// Recovers the outcome the runner would have assigned to `series`.
pub fn infer_outcome(series: &TimeSeries, metrics: &Metrics, cfg: &MetricsConfig) -> Outcome {
    let last = series.len() - 1;
    let time = series.t[last];
    if series.theta[last].abs() > std::f64::consts::FRAC_PI_2 {
        Outcome::FellOver { time }
    } else if cfg
        .track_half_length
        .is_some_and(|h| series.x[last].abs() > h)
    {
        Outcome::TrackExceeded { time }
    } else if metrics.settling_time.is_some() {
        Outcome::Settled
    } else {
        Outcome::NotSettled
    }
}

fn checks(spec: &TuningSpec, series: &TimeSeries, m: &Metrics) -> Vec<Check> {
    let angle_settling = time_to_stay_within(
        &series.t,
        &series.theta,
        series.t[0],
        spec.angle_band_deg.to_radians(),
    );
    let at_most = |name, value: Option<f64>, limit| Check {
        name,
        value,
        limit,
        pass: value.is_some_and(|v| v <= limit),
    };
    let mut out = vec![
        at_most(
            "overshoot_pct",
            Some(m.percent_overshoot.unwrap_or(0.0)),
            spec.max_overshoot_pct,
        ),
        at_most(
            "peak_angle_deg",
            Some(m.peak_angle_deg),
            spec.max_peak_angle_deg,
        ),
        at_most("angle_settling", angle_settling, spec.max_angle_settling),
    ];
    if let Some(limit) = spec.max_settling_time {
        out.push(at_most("settling_time", m.settling_time, limit));
    }
    out
}

impl Report {
    pub fn new(
        scenario: impl Into<String>,
        series: &TimeSeries,
        cfg: &MetricsConfig,
        outcome: Option<Outcome>,
        spec: Option<&TuningSpec>,
    ) -> Result<Self, CliError> {
        let metrics = compute_metrics(series, cfg)?;
        let outcome = outcome.unwrap_or_else(|| infer_outcome(series, &metrics, cfg));
        let checks = spec.map(|s| checks(s, series, &metrics));
        Ok(Self {
            scenario: scenario.into(),
            outcome,
            metrics,
            checks,
        })
    }

    pub fn passes(&self) -> Option<bool> {
        self.checks.as_ref().map(|c| c.iter().all(|c| c.pass))
    }
}

fn opt(v: Option<f64>, absent: &str) -> String {
    v.map_or_else(|| absent.to_string(), |v| v.to_string())
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.metrics;
        writeln!(f, "scenario            {}", self.scenario)?;
        writeln!(f, "outcome             {}", self.outcome)?;
        writeln!(
            f,
            "percent_overshoot   {}",
            opt(m.percent_overshoot, "none (zero-height step)")
        )?;
        writeln!(f, "undershoot_m        {}", m.undershoot)?;
        writeln!(f, "peak_angle_deg      {}", m.peak_angle_deg)?;
        writeln!(
            f,
            "settling_time_s     {}",
            opt(m.settling_time, "not settled")
        )?;
        writeln!(f, "rise_time_s         {}", opt(m.rise_time, "none"))?;
        writeln!(f, "steady_state_err_m  {}", m.steady_state_error)?;
        writeln!(f, "max_abs_x_m         {}", m.max_abs_x)?;
        writeln!(f, "peak_abs_force_n    {}", m.peak_abs_force)?;
        writeln!(f, "saturation_duty_pct {}", m.saturation_duty)?;
        writeln!(f, "track_violation     {}", m.track_violation)?;
        if let Some(checks) = &self.checks {
            for c in checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                writeln!(
                    f,
                    "spec {:<15}{} (limit {}) {verdict}",
                    c.name,
                    opt(c.value, "never"),
                    c.limit
                )?;
            }
            writeln!(
                f,
                "spec                {}",
                if self.passes() == Some(true) {
                    "PASS"
                } else {
                    "FAIL"
                }
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cartpole_core::metrics::Sample;

    fn constant(x: f64, rows: usize) -> TimeSeries {
        let mut s = TimeSeries::default();
        (0..rows).for_each(|k| {
            s.push(Sample {
                t: k as f64 * 0.01,
                x,
                ..Sample::default()
            })
        });
        s
    }

    #[test]
    fn constant_trace_settles_at_zero() {
        let r = Report::new(
            "flat",
            &constant(0.1, 3),
            &MetricsConfig::new(0.1),
            None,
            None,
        )
        .unwrap();
        assert_eq!(r.metrics.settling_time, Some(0.0));
        assert_eq!(r.outcome, Outcome::Settled);
        assert!(r.checks.is_none());
        assert!(!r.to_string().contains("spec"));
    }

    #[test]
    fn fallen_trace_is_recognized() {
        let mut s = constant(0.0, 3);
        s.theta[2] = 1.6;
        let r = Report::new("fall", &s, &MetricsConfig::new(0.1), None, None).unwrap();
        assert_eq!(r.outcome, Outcome::FellOver { time: 0.02 });
    }

    #[test]
    fn spec_lines_only_with_spec() {
        let r = Report::new(
            "flat",
            &constant(0.1, 3),
            &MetricsConfig::new(0.1),
            None,
            Some(&TuningSpec::default()),
        )
        .unwrap();
        assert_eq!(r.passes(), Some(true));
        assert!(r.to_string().contains("spec                PASS"));
    }
}
