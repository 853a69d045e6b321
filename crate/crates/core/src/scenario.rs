//! Closed-loop scenario definition and the fixed-step runner.

use alloc::boxed::Box;
use alloc::string::String;
use core::f64::consts::FRAC_PI_2;
use core::fmt;

use crate::control::{
    cascade_step, hybrid_step, CascadeConfig, CascadeMemory, HybridConfig, HybridMemory, LqrConfig,
    LqrFeedback, LqrWeights, PidGains,
};
use crate::hwemu::{embedded_cascade_step, EmbeddedCascade, EmbeddedCascadeMemory, HardwareModel};
use crate::metrics::{compute_metrics, MetricsConfig, Sample, TimeSeries};
use crate::plant::{linearize, step_at, DisturbanceSite, PlantParams, State};
use crate::signal::Signal;
use crate::{Error, Result};

/// Outer PID plus an LQR designed on the scenario's own plant at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridSpec {
    pub position: PidGains,
    pub angle_setpoint_limit: f64,
    pub weights: LqrWeights,
    pub feedback: LqrFeedback,
    pub force_limit: f64,
    /// LQR sample period, s.
    pub ts: f64,
}

impl HybridSpec {
    pub fn design(&self, plant: &PlantParams) -> Result<HybridConfig> {
        let cfg = HybridConfig {
            position: self.position,
            angle_setpoint_limit: self.angle_setpoint_limit,
            lqr: LqrConfig::design(&linearize(plant), self.weights)?,
            feedback: self.feedback,
            force_limit: self.force_limit,
            ts: self.ts,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Controller {
    Cascade(CascadeConfig),
    Hybrid(HybridSpec),
    /// Rig firmware; needs [`Sensing::Hardware`].
    Embedded(EmbeddedCascade),
}

impl Controller {
    /// Period at which the runner calls the controller.
    pub fn sample_period(&self) -> f64 {
        match self {
            Controller::Cascade(c) => c.angle.ts,
            Controller::Hybrid(h) => h.ts,
            Controller::Embedded(e) => e.angle.sample_period,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Sensing {
    /// Controllers see the true state.
    #[default]
    Ideal,
    /// Encoder and ultrasonic quantization/noise on the measurements and the
    /// PWM deadband remap on the actuator.
    Hardware(HardwareModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantParams,
    pub controller: Controller,
    pub sensing: Sensing,
    /// Cart position command, m.
    pub reference: Signal,
    /// External force, N.
    pub disturbance: Signal,
    pub disturbance_site: DisturbanceSite,
    pub initial: State,
    pub duration: f64,
    pub dt: f64,
    pub track_half_length: Option<f64>,
    /// Seeds the ultrasonic noise stream; overrides the model's own seed.
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidScenario("duration must be positive".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() || self.dt > self.duration {
            return Err(Error::InvalidScenario(
                "dt must be positive and no longer than the duration".into(),
            ));
        }
        if !self.initial.is_finite() {
            return Err(Error::InvalidScenario(
                "initial state must be finite".into(),
            ));
        }
        if let Some(h) = self.track_half_length {
            if !(h > 0.0) {
                return Err(Error::InvalidScenario(
                    "track half length must be positive".into(),
                ));
            }
        }
        match &self.controller {
            Controller::Cascade(c) => c.validate()?,
            Controller::Hybrid(h) => {
                h.design(&self.plant)?;
            }
            Controller::Embedded(e) => {
                e.outer_divider()?;
                if !matches!(self.sensing, Sensing::Hardware(_)) {
                    return Err(Error::InvalidScenario(
                        "the embedded controller needs hardware sensing".into(),
                    ));
                }
            }
        }
        if let Sensing::Hardware(hw) = &self.sensing {
            hw.validate()?;
        }
        self.control_divider().map(|_| ())
    }

    /// Integration steps per controller sample.
    pub fn control_divider(&self) -> Result<u64> {
        let ratio = self.controller.sample_period() / self.dt;
        let n = libm::round(ratio);
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::InvalidScenario(
                "dt must divide the controller sample periods".into(),
            ));
        }
        Ok(n as u64)
    }

    /// Number of recorded samples, `round(duration / dt)`.
    pub fn steps(&self) -> usize {
        libm::round(self.duration / self.dt) as usize
    }

    /// Metrics against the final command, with this scenario's track.
    pub fn metrics_config(&self) -> MetricsConfig {
        MetricsConfig {
            track_half_length: self.track_half_length,
            ..MetricsConfig::new(self.reference.final_value())
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Ran to the end with the cart inside the ±2% band.
    Settled,
    /// Ran to the end without settling.
    NotSettled,
    /// |θ| exceeded 90° at `time`.
    FellOver { time: f64 },
    /// |x| left the track at `time`.
    TrackExceeded { time: f64 },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Settled => "settled",
            Outcome::NotSettled => "not settled",
            Outcome::FellOver { .. } => "fell over",
            Outcome::TrackExceeded { .. } => "track exceeded",
        }
    }

    pub fn aborted(&self) -> bool {
        matches!(
            self,
            Outcome::FellOver { .. } | Outcome::TrackExceeded { .. }
        )
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::FellOver { time } | Outcome::TrackExceeded { time } => {
                write!(f, "{} at t={time}", self.label())
            }
            _ => f.write_str(self.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub series: TimeSeries,
    pub outcome: Outcome,
}

enum Memory {
    Cascade(CascadeMemory),
    Hybrid(Box<(HybridConfig, HybridMemory)>),
    Embedded(EmbeddedCascadeMemory),
}

/// Simulates the scenario. Physical failure ends the run early and is
/// reported in [`Run::outcome`]; only configuration problems are errors.
pub fn run_scenario(sc: &Scenario) -> Result<Run> {
    sc.validate()?;
    let divider = sc.control_divider()?;
    let n = sc.steps();
    let hw = match sc.sensing {
        Sensing::Hardware(hw) => Some(hw),
        Sensing::Ideal => None,
    };
    let mut sonar = match hw {
        Some(hw) => Some(
            crate::hwemu::UltrasonicModel {
                seed: sc.seed,
                ..hw.ultrasonic
            }
            .sensor()?,
        ),
        None => None,
    };
    let encoder = hw.map(|h| h.encoder);
    let measure =
        |s: &State, t: f64, sonar: &mut Option<crate::hwemu::UltrasonicSensor>| -> (f64, f64) {
            match (sonar.as_mut(), encoder) {
                (Some(u), Some(e)) => (
                    u.measure_position(s.x, t),
                    e.decode_angle(e.encode_angle(s.theta)),
                ),
                _ => (s.x, s.theta),
            }
        };

    let mut state = sc.initial;
    let (x0, th0) = measure(&state, 0.0, &mut sonar);
    let mut memory = match &sc.controller {
        Controller::Cascade(_) => Memory::Cascade(CascadeMemory::default()),
        Controller::Hybrid(h) => {
            Memory::Hybrid(Box::new((h.design(&sc.plant)?, HybridMemory::default())))
        }
        Controller::Embedded(_) => {
            let enc = encoder.unwrap_or_default();
            Memory::Embedded(EmbeddedCascadeMemory::primed(
                100.0 * x0,
                enc.encode_angle(th0) as f64,
            ))
        }
    };
    // Previous measurement, for velocity estimates under hardware sensing.
    let mut prev_meas = (x0, th0);
    let (mut meas_x, mut meas_theta) = (x0, th0);
    let (mut force, mut theta_sp) = (0.0, 0.0);

    let mut series = TimeSeries::with_capacity(n);
    let mut outcome = None;
    for k in 0..n {
        let t = k as f64 * sc.dt;
        let x_ref = sc.reference.value_at(t);
        let disturbance = sc.disturbance.value_at(t);
        if (k as u64).is_multiple_of(divider) {
            (meas_x, meas_theta) = measure(&state, t, &mut sonar);
            let (f, sp) = match &mut memory {
                Memory::Cascade(mem) => {
                    let Controller::Cascade(cfg) = &sc.controller else {
                        unreachable!()
                    };
                    let (out, next) = cascade_step(cfg, mem, x_ref, meas_x, meas_theta)?;
                    *mem = next;
                    (out.force, out.angle_setpoint)
                }
                Memory::Hybrid(hybrid) => {
                    let (cfg, mem) = &mut **hybrid;
                    let meas = if hw.is_some() {
                        let ts = cfg.ts;
                        let est = State::new(
                            meas_x,
                            if k == 0 {
                                0.0
                            } else {
                                (meas_x - prev_meas.0) / ts
                            },
                            meas_theta,
                            if k == 0 {
                                0.0
                            } else {
                                (meas_theta - prev_meas.1) / ts
                            },
                        );
                        prev_meas = (meas_x, meas_theta);
                        est
                    } else {
                        state
                    };
                    let (f, sp, next) = hybrid_step(cfg, mem, x_ref, &meas)?;
                    *mem = next;
                    (f, sp)
                }
                Memory::Embedded(mem) => {
                    let Controller::Embedded(cfg) = &sc.controller else {
                        unreachable!()
                    };
                    let enc = encoder.unwrap_or_default();
                    let counts = enc.encode_angle(meas_theta) as f64;
                    let (u, next) =
                        embedded_cascade_step(cfg, mem, 100.0 * x_ref, 100.0 * meas_x, counts)?;
                    *mem = next;
                    (
                        u,
                        enc.decode_angle(libm::round(next.setpoint_counts) as i64),
                    )
                }
            };
            theta_sp = sp;
            force = match (hw, &sc.controller) {
                (Some(h), Controller::Embedded(_)) => h.motor.pwm_to_force(h.motor.remap_pwm(f)),
                (Some(h), _) => h
                    .motor
                    .pwm_to_force(h.motor.remap_pwm(h.motor.force_to_pwm(f))),
                (None, _) => f,
            };
        }
        series.push(Sample {
            t,
            x: state.x,
            v: state.v,
            theta: state.theta,
            omega: state.omega,
            theta_sp,
            force,
            disturbance,
            measured_x: meas_x,
            measured_theta: meas_theta,
        });
        if state.theta.abs() > FRAC_PI_2 {
            outcome = Some(Outcome::FellOver { time: t });
            break;
        }
        if sc.track_half_length.is_some_and(|h| state.x.abs() > h) {
            outcome = Some(Outcome::TrackExceeded { time: t });
            break;
        }
        if k + 1 < n {
            state = step_at(
                &sc.plant,
                &state,
                force,
                disturbance,
                sc.disturbance_site,
                sc.dt,
            )
            .map_err(|_| Error::IntegrationFailure {
                step: k as u64,
                time: t,
            })?;
        }
    }

    let outcome = match outcome {
        Some(o) => o,
        None => {
            let m = compute_metrics(&series, &sc.metrics_config())?;
            if m.settling_time.is_some() {
                Outcome::Settled
            } else {
                Outcome::NotSettled
            }
        }
    };
    Ok(Run { series, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::cascade::DEFAULT_ANGLE_SETPOINT_LIMIT;

    fn quiet_cascade() -> Scenario {
        Scenario {
            name: "zero".into(),
            plant: PlantParams::bench_rig(),
            controller: Controller::Cascade(
                CascadeConfig::new(
                    PidGains::new(-0.03, 0.0, -0.24, 9.48, 1.0, 1e-3).unwrap(),
                    PidGains::new(204.26, 0.0, 3.70, 75.3, 12.0, 1e-3).unwrap(),
                    DEFAULT_ANGLE_SETPOINT_LIMIT,
                )
                .unwrap(),
            ),
            sensing: Sensing::Ideal,
            reference: Signal::zero(),
            disturbance: Signal::zero(),
            disturbance_site: DisturbanceSite::Cart,
            initial: State::UPRIGHT,
            duration: 1.0,
            dt: 1e-3,
            track_half_length: None,
            seed: 0,
        }
    }

    #[test]
    fn rest_stays_at_rest() {
        let run = run_scenario(&quiet_cascade()).unwrap();
        assert_eq!(run.series.len(), 1000);
        assert!(run
            .series
            .samples()
            .all(|s| s.x == 0.0 && s.theta == 0.0 && s.force == 0.0));
        assert_eq!(run.outcome, Outcome::Settled);
    }

    #[test]
    fn time_column_is_exact() {
        let run = run_scenario(&quiet_cascade()).unwrap();
        assert_eq!(run.series.t[0], 0.0);
        assert_eq!(run.series.t[999], 999.0 * 1e-3);
    }

    #[test]
    fn invalid_configurations() {
        let mut s = quiet_cascade();
        s.dt = 0.0;
        assert!(run_scenario(&s).is_err());
        let mut s = quiet_cascade();
        s.dt = 3e-4;
        assert!(run_scenario(&s).is_err());
        let mut s = quiet_cascade();
        s.duration = -1.0;
        assert!(run_scenario(&s).is_err());
    }

    #[test]
    fn falls_without_control() {
        let mut s = quiet_cascade();
        if let Controller::Cascade(c) = &mut s.controller {
            c.angle = PidGains::new(0.0, 0.0, 0.0, 0.0, 12.0, 1e-3).unwrap();
        }
        s.initial = State::new(0.0, 0.0, 0.05, 0.0);
        s.duration = 5.0;
        let run = run_scenario(&s).unwrap();
        assert!(matches!(run.outcome, Outcome::FellOver { .. }));
        assert!(run.series.theta.last().unwrap().abs() > FRAC_PI_2);
    }
}
