//! Derivative-free search for cascade gains meeting transient specs.
//!
//! Coordinate pattern search over `(kp, kd, ki)` of the position loop, then
//! of the angle loop, in that fixed order. Each coordinate tries a step up
//! and down inside its bounds and keeps any improvement; a sweep without
//! improvement halves every step. The objective is
//! `violation_weight · Σ violations + settling time`, so constraint
//! satisfaction dominates. There is no optimality claim.

use crate::control::{CascadeConfig, PidGains};
use crate::metrics::{compute_metrics, time_to_stay_within, Metrics};
use crate::scenario::{run_scenario, Controller, Outcome, Scenario};
use crate::{Error, Result};

/// Transient requirements for a tuned S1-style step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningSpec {
    /// Cart overshoot must stay below this, %.
    pub max_overshoot_pct: f64,
    /// Peak |θ| must stay below this, degrees.
    pub max_peak_angle_deg: f64,
    /// The angle must be inside `±angle_band_deg` for good by this time, s.
    pub max_angle_settling: f64,
    pub angle_band_deg: f64,
    /// Optional bound on the cart ±2% settling time, s.
    pub max_settling_time: Option<f64>,
    pub violation_weight: f64,
    pub budget: usize,
}

impl Default for TuningSpec {
    fn default() -> Self {
        Self {
            max_overshoot_pct: 10.0,
            max_peak_angle_deg: 15.0,
            max_angle_settling: 3.0,
            angle_band_deg: 1.0,
            max_settling_time: None,
            violation_weight: 100.0,
            budget: 200,
        }
    }
}

impl TuningSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.max_overshoot_pct,
            self.max_peak_angle_deg,
            self.max_angle_settling,
            self.angle_band_deg,
        ];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite())
            || self.max_settling_time.is_some_and(|v| !(v > 0.0))
            || !(self.violation_weight >= 0.0)
            || self.budget == 0
        {
            return Err(Error::InvalidScenario(
                "tuning thresholds, weight and budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `[lo, hi]` per gain, ordered kp, kd, ki.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainBounds {
    pub position: [(f64, f64); 3],
    pub angle: [(f64, f64); 3],
}

impl GainBounds {
    /// Each gain ± `fraction` of its magnitude; zero gains stay fixed.
    pub fn around(cfg: &CascadeConfig, fraction: f64) -> Self {
        let span = |k: f64| {
            let d = k.abs() * fraction;
            (k - d, k + d)
        };
        let three = |g: &PidGains| [span(g.kp), span(g.kd), span(g.ki)];
        Self {
            position: three(&cfg.position),
            angle: three(&cfg.angle),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .position
            .iter()
            .chain(&self.angle)
            .any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi)
        {
            return Err(Error::InvalidScenario(
                "gain bounds must be finite with lo <= hi".into(),
            ));
        }
        Ok(())
    }
}

/// One scored candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub config: CascadeConfig,
    pub metrics: Metrics,
    pub outcome: Outcome,
    /// Time for |θ| to stay inside the spec band, `None` if it never does.
    pub angle_settling: Option<f64>,
    pub penalty: f64,
    pub meets_spec: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found {
        best: Evaluation,
        evaluations: usize,
    },
    /// Budget exhausted without meeting the spec; carries the best attempt.
    Failed {
        best: Evaluation,
        evaluations: usize,
    },
}

impl SearchOutcome {
    pub fn best(&self) -> &Evaluation {
        match self {
            SearchOutcome::Found { best, .. } | SearchOutcome::Failed { best, .. } => best,
        }
    }

    pub fn evaluations(&self) -> usize {
        match self {
            SearchOutcome::Found { evaluations, .. }
            | SearchOutcome::Failed { evaluations, .. } => *evaluations,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }
}

/// Runs `base` with `cfg` and scores it against `spec`.
pub fn evaluate(spec: &TuningSpec, base: &Scenario, cfg: &CascadeConfig) -> Result<Evaluation> {
    let mut sc = base.clone();
    sc.controller = Controller::Cascade(*cfg);
    let run = run_scenario(&sc)?;
    let metrics = compute_metrics(&run.series, &sc.metrics_config())?;
    let s = &run.series;
    let angle_settling =
        time_to_stay_within(&s.t, &s.theta, s.t[0], spec.angle_band_deg.to_radians());

    let excess = |value: f64, limit: f64| ((value - limit) / limit).max(0.0);
    let mut violation = excess(
        metrics.percent_overshoot.unwrap_or(0.0),
        spec.max_overshoot_pct,
    ) + excess(metrics.peak_angle_deg, spec.max_peak_angle_deg)
        + excess(
            angle_settling.unwrap_or(sc.duration),
            spec.max_angle_settling,
        );
    if let Some(limit) = spec.max_settling_time {
        violation += excess(metrics.settling_time.unwrap_or(sc.duration), limit);
    }
    let completed = s.t[s.len() - 1] / sc.duration;
    match run.outcome {
        Outcome::FellOver { .. } | Outcome::TrackExceeded { .. } => {
            violation += 10.0 + (1.0 - completed)
        }
        Outcome::NotSettled => violation += 1.0,
        Outcome::Settled => {}
    }
    let meets_spec = violation == 0.0;
    let penalty = spec.violation_weight * violation + metrics.settling_time.unwrap_or(sc.duration);
    Ok(Evaluation {
        config: *cfg,
        metrics,
        outcome: run.outcome,
        angle_settling,
        penalty,
        meets_spec,
    })
}

fn with_coordinate(cfg: &CascadeConfig, index: usize, value: f64) -> CascadeConfig {
    let mut c = *cfg;
    let g = if index < 3 {
        &mut c.position
    } else {
        &mut c.angle
    };
    match index % 3 {
        0 => g.kp = value,
        1 => g.kd = value,
        _ => g.ki = value,
    }
    c
}

fn coordinate(cfg: &CascadeConfig, index: usize) -> f64 {
    let g = if index < 3 { &cfg.position } else { &cfg.angle };
    [g.kp, g.kd, g.ki][index % 3]
}

/// Pattern search starting from the cascade gains of `base`, which must
/// use [`Controller::Cascade`]. Filter coefficients, limits and sample
/// periods are kept.
pub fn gain_search(
    spec: &TuningSpec,
    bounds: &GainBounds,
    base: &Scenario,
) -> Result<SearchOutcome> {
    spec.validate()?;
    bounds.validate()?;
    let Controller::Cascade(start) = base.controller else {
        return Err(Error::InvalidScenario(
            "gain search needs a cascade PID scenario".into(),
        ));
    };
    let limits: [(f64, f64); 6] = core::array::from_fn(|i| {
        if i < 3 {
            bounds.position[i]
        } else {
            bounds.angle[i - 3]
        }
    });
    let mut current = start;
    for (i, (lo, hi)) in limits.iter().enumerate() {
        current = with_coordinate(&current, i, coordinate(&current, i).clamp(*lo, *hi));
    }
    let mut best = evaluate(spec, base, &current)?;
    let mut evaluations = 1;
    let mut steps: [f64; 6] = core::array::from_fn(|i| (limits[i].1 - limits[i].0) / 4.0);

    'search: while !best.meets_spec {
        let mut improved = false;
        for i in 0..6 {
            if steps[i] <= 0.0 {
                continue;
            }
            for direction in [1.0, -1.0] {
                if evaluations >= spec.budget {
                    break 'search;
                }
                let (lo, hi) = limits[i];
                let value = (coordinate(&best.config, i) + direction * steps[i]).clamp(lo, hi);
                if value == coordinate(&best.config, i) {
                    continue;
                }
                let candidate = evaluate(spec, base, &with_coordinate(&best.config, i, value))?;
                evaluations += 1;
                if candidate.penalty < best.penalty {
                    best = candidate;
                    improved = true;
                    if best.meets_spec {
                        break 'search;
                    }
                    break;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s /= 2.0);
            if steps.iter().all(|s| *s < 1e-12) {
                break;
            }
        }
    }
    Ok(if best.meets_spec {
        SearchOutcome::Found { best, evaluations }
    } else {
        SearchOutcome::Failed { best, evaluations }
    })
}
