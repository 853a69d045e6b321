//! TOML configuration files.
//!
//! A run config names a catalog scenario or carries a full inline
//! definition, plus optional output settings:
//!
//! ```toml
//! scenario = "S1"        # or an [inline] table, never both
//! out = "s1.csv"
//! format = "csv"         # csv | tsv
//! seed = 7
//! dt = 0.0005
//! ```
//!
//! The inline schema is documented in the README. `tune` writes its result
//! as a run config with an inline scenario, so the file feeds straight back
//! into `run --config`.

use std::path::{Path, PathBuf};

use cartpole_core::catalog;
use cartpole_core::control::{CascadeConfig, LqrFeedback, LqrWeights, PidGains};
use cartpole_core::hwemu::{
    Direction, EmbeddedCascade, EmbeddedPidGains, EncoderModel, HardwareModel, MotorModel,
    UltrasonicModel,
};
use cartpole_core::plant::{DisturbanceSite, PlantParams, State};
use cartpole_core::scenario::{Controller, HybridSpec, Scenario, Sensing};
use cartpole_core::signal::Signal;
use cartpole_core::tune::TuningSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Trace export format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    /// Tab-separated, convenient for gnuplot.
    Tsv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        }
    }

    pub fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<ScenarioDef>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// Resolves the scenario and applies the seed and dt overrides.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let mut sc = match (&self.scenario, &self.inline) {
            (Some(name), None) => named(name)?,
            (None, Some(def)) => def.to_scenario()?,
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "config names a scenario and defines one inline; pick one".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "no scenario: give a name or an [inline] definition".into(),
                ))
            }
        };
        if let Some(seed) = self.seed {
            sc.seed = seed;
        }
        if let Some(dt) = self.dt {
            sc.dt = dt;
        }
        sc.validate()?;
        Ok(sc)
    }
}

pub fn named(name: &str) -> Result<Scenario, CliError> {
    catalog::scenario(name).ok_or_else(|| CliError::UnknownScenario(name.to_string()))
}

/// Full scenario definition; all quantities SI, angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDef {
    pub name: String,
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_half_length: Option<f64>,
    #[serde(default)]
    pub disturbance_site: SiteDef,
    /// `[[start_time, value], ...]`, m.
    pub reference: Vec<(f64, f64)>,
    /// `[[start_time, value], ...]`, N.
    #[serde(default)]
    pub disturbance: Vec<(f64, f64)>,
    #[serde(default)]
    pub initial: InitialDef,
    pub plant: PlantDef,
    pub controller: ControllerDef,
    #[serde(default)]
    pub sensing: SensingDef,
}

fn default_dt() -> f64 {
    catalog::SIMULATION_TS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteDef {
    #[default]
    Cart,
    PendulumCom,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialDef {
    pub x: f64,
    pub v: f64,
    pub theta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantDef {
    pub cart_mass: f64,
    pub pendulum_mass: f64,
    pub pendulum_length: f64,
    /// Defaults to half the length (uniform rod).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub com_distance: Option<f64>,
    /// Inertia about the COM; defaults to `m·l²/12`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<f64>,
    #[serde(default)]
    pub cart_friction: f64,
}

/// Symmetric output limit `±limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidDef {
    pub kp: f64,
    #[serde(default)]
    pub ki: f64,
    #[serde(default)]
    pub kd: f64,
    #[serde(default)]
    pub n: f64,
    pub limit: f64,
    #[serde(default = "default_dt")]
    pub ts: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionDef {
    #[default]
    Direct,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddedPidDef {
    pub kp: f64,
    #[serde(default)]
    pub ki: f64,
    #[serde(default)]
    pub kd: f64,
    pub sample_period: f64,
    pub limit: f64,
    #[serde(default)]
    pub direction: DirectionDef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackDef {
    #[default]
    FullState,
    AngleOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControllerDef {
    Cascade {
        angle_setpoint_limit: f64,
        position: PidDef,
        angle: PidDef,
    },
    Hybrid {
        angle_setpoint_limit: f64,
        force_limit: f64,
        ts: f64,
        /// Diagonal of Q.
        q: [f64; 4],
        r: f64,
        #[serde(default)]
        feedback: FeedbackDef,
        position: PidDef,
    },
    Embedded {
        position: EmbeddedPidDef,
        angle: EmbeddedPidDef,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SensingDef {
    #[default]
    Ideal,
    Hardware(HardwareDef),
}

/// The ultrasonic noise seed is the scenario seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareDef {
    pub pulses_per_rev: u32,
    pub noise_std: f64,
    pub resolution: f64,
    pub sample_period: f64,
    pub pwm_full_scale: f64,
    pub deadband_floor: f64,
    pub force_per_pwm: f64,
}

impl Default for HardwareDef {
    fn default() -> Self {
        HardwareDef::from(&HardwareModel::default())
    }
}

impl From<&HardwareModel> for HardwareDef {
    fn from(h: &HardwareModel) -> Self {
        Self {
            pulses_per_rev: h.encoder.pulses_per_rev,
            noise_std: h.ultrasonic.noise_std,
            resolution: h.ultrasonic.resolution,
            sample_period: h.ultrasonic.sample_period,
            pwm_full_scale: h.motor.pwm_full_scale,
            deadband_floor: h.motor.deadband_floor,
            force_per_pwm: h.motor.force_per_pwm,
        }
    }
}

impl HardwareDef {
    fn model(&self) -> HardwareModel {
        HardwareModel {
            encoder: EncoderModel {
                pulses_per_rev: self.pulses_per_rev,
            },
            ultrasonic: UltrasonicModel {
                noise_std: self.noise_std,
                resolution: self.resolution,
                sample_period: self.sample_period,
                seed: 0,
            },
            motor: MotorModel {
                pwm_full_scale: self.pwm_full_scale,
                deadband_floor: self.deadband_floor,
                force_per_pwm: self.force_per_pwm,
            },
        }
    }
}

impl From<&PidGains> for PidDef {
    fn from(g: &PidGains) -> Self {
        Self {
            kp: g.kp,
            ki: g.ki,
            kd: g.kd,
            n: g.filter_n,
            limit: g.out_max,
            ts: g.ts,
        }
    }
}

impl PidDef {
    fn gains(&self) -> Result<PidGains, CliError> {
        Ok(PidGains::new(
            self.kp, self.ki, self.kd, self.n, self.limit, self.ts,
        )?)
    }
}

impl From<&EmbeddedPidGains> for EmbeddedPidDef {
    fn from(g: &EmbeddedPidGains) -> Self {
        Self {
            kp: g.kp(),
            ki: g.ki(),
            kd: g.kd(),
            sample_period: g.sample_period,
            limit: g.out_max,
            direction: match g.direction {
                Direction::Direct => DirectionDef::Direct,
                Direction::Reverse => DirectionDef::Reverse,
            },
        }
    }
}

impl EmbeddedPidDef {
    fn gains(&self) -> Result<EmbeddedPidGains, CliError> {
        let direction = match self.direction {
            DirectionDef::Direct => Direction::Direct,
            DirectionDef::Reverse => Direction::Reverse,
        };
        Ok(EmbeddedPidGains::new(
            self.kp,
            self.ki,
            self.kd,
            self.sample_period,
            self.limit,
            direction,
        )?)
    }
}

impl From<&Controller> for ControllerDef {
    fn from(c: &Controller) -> Self {
        match c {
            Controller::Cascade(c) => ControllerDef::Cascade {
                angle_setpoint_limit: c.angle_setpoint_limit,
                position: (&c.position).into(),
                angle: (&c.angle).into(),
            },
            Controller::Hybrid(h) => ControllerDef::Hybrid {
                angle_setpoint_limit: h.angle_setpoint_limit,
                force_limit: h.force_limit,
                ts: h.ts,
                q: core::array::from_fn(|i| h.weights.q[(i, i)]),
                r: h.weights.r,
                feedback: match h.feedback {
                    LqrFeedback::FullState => FeedbackDef::FullState,
                    LqrFeedback::AngleOnly => FeedbackDef::AngleOnly,
                },
                position: (&h.position).into(),
            },
            Controller::Embedded(e) => ControllerDef::Embedded {
                position: (&e.position).into(),
                angle: (&e.angle).into(),
            },
        }
    }
}

impl ControllerDef {
    pub fn controller(&self) -> Result<Controller, CliError> {
        Ok(match self {
            ControllerDef::Cascade {
                angle_setpoint_limit,
                position,
                angle,
            } => Controller::Cascade(CascadeConfig::new(
                position.gains()?,
                angle.gains()?,
                *angle_setpoint_limit,
            )?),
            ControllerDef::Hybrid {
                angle_setpoint_limit,
                force_limit,
                ts,
                q,
                r,
                feedback,
                position,
            } => {
                let weights = LqrWeights::diagonal(*q, *r);
                weights.validate()?;
                Controller::Hybrid(HybridSpec {
                    position: position.gains()?,
                    angle_setpoint_limit: *angle_setpoint_limit,
                    weights,
                    feedback: match feedback {
                        FeedbackDef::FullState => LqrFeedback::FullState,
                        FeedbackDef::AngleOnly => LqrFeedback::AngleOnly,
                    },
                    force_limit: *force_limit,
                    ts: *ts,
                })
            }
            ControllerDef::Embedded { position, angle } => Controller::Embedded(EmbeddedCascade {
                position: position.gains()?,
                angle: angle.gains()?,
            }),
        })
    }
}

impl From<&PlantParams> for PlantDef {
    fn from(p: &PlantParams) -> Self {
        Self {
            cart_mass: p.cart_mass(),
            pendulum_mass: p.pendulum_mass(),
            pendulum_length: p.pendulum_length(),
            com_distance: Some(p.com_distance()),
            inertia: Some(p.inertia_com()),
            gravity: Some(p.gravity()),
            cart_friction: p.cart_friction(),
        }
    }
}

impl PlantDef {
    pub fn plant(&self) -> Result<PlantParams, CliError> {
        let mut p =
            PlantParams::uniform_rod(self.cart_mass, self.pendulum_mass, self.pendulum_length)?;
        if self.com_distance.is_some() || self.inertia.is_some() {
            p = p.with_mass_distribution(
                self.com_distance.unwrap_or(p.com_distance()),
                self.inertia.unwrap_or(p.inertia_com()),
            )?;
        }
        if let Some(g) = self.gravity {
            p = p.with_gravity(g)?;
        }
        Ok(p.with_cart_friction(self.cart_friction)?)
    }
}

impl From<&Scenario> for ScenarioDef {
    fn from(sc: &Scenario) -> Self {
        Self {
            name: sc.name.clone(),
            duration: sc.duration,
            dt: sc.dt,
            seed: sc.seed,
            track_half_length: sc.track_half_length,
            disturbance_site: match sc.disturbance_site {
                DisturbanceSite::Cart => SiteDef::Cart,
                DisturbanceSite::PendulumCom => SiteDef::PendulumCom,
            },
            reference: sc.reference.segments().to_vec(),
            disturbance: sc.disturbance.segments().to_vec(),
            initial: InitialDef {
                x: sc.initial.x,
                v: sc.initial.v,
                theta: sc.initial.theta,
                omega: sc.initial.omega,
            },
            plant: (&sc.plant).into(),
            controller: (&sc.controller).into(),
            sensing: match &sc.sensing {
                Sensing::Ideal => SensingDef::Ideal,
                Sensing::Hardware(h) => SensingDef::Hardware(h.into()),
            },
        }
    }
}

impl ScenarioDef {
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let sc = Scenario {
            name: self.name.clone(),
            plant: self.plant.plant()?,
            controller: self.controller.controller()?,
            sensing: match &self.sensing {
                SensingDef::Ideal => Sensing::Ideal,
                SensingDef::Hardware(h) => Sensing::Hardware(h.model()),
            },
            reference: Signal::new(self.reference.clone())?,
            disturbance: Signal::new(self.disturbance.clone())?,
            disturbance_site: match self.disturbance_site {
                SiteDef::Cart => DisturbanceSite::Cart,
                SiteDef::PendulumCom => DisturbanceSite::PendulumCom,
            },
            initial: State::new(
                self.initial.x,
                self.initial.v,
                self.initial.theta,
                self.initial.omega,
            ),
            duration: self.duration,
            dt: self.dt,
            track_half_length: self.track_half_length,
            seed: self.seed,
        };
        sc.validate()?;
        Ok(sc)
    }
}

/// Tuning spec file: thresholds plus the search box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecDef {
    pub max_overshoot_pct: f64,
    pub max_peak_angle_deg: f64,
    pub max_angle_settling: f64,
    pub angle_band_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_settling_time: Option<f64>,
    pub violation_weight: f64,
    pub budget: usize,
    /// Each gain is searched within `±bounds_fraction` of its start value.
    pub bounds_fraction: f64,
}

impl Default for SpecDef {
    fn default() -> Self {
        let s = TuningSpec::default();
        Self {
            max_overshoot_pct: s.max_overshoot_pct,
            max_peak_angle_deg: s.max_peak_angle_deg,
            max_angle_settling: s.max_angle_settling,
            angle_band_deg: s.angle_band_deg,
            max_settling_time: s.max_settling_time,
            violation_weight: s.violation_weight,
            budget: s.budget,
            bounds_fraction: 0.5,
        }
    }
}

impl SpecDef {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read spec {}: {e}", path.display())))?;
        let spec: SpecDef = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        spec.tuning().validate()?;
        if !(spec.bounds_fraction > 0.0 && spec.bounds_fraction.is_finite()) {
            return Err(CliError::Config("bounds_fraction must be positive".into()));
        }
        Ok(spec)
    }

    pub fn tuning(&self) -> TuningSpec {
        TuningSpec {
            max_overshoot_pct: self.max_overshoot_pct,
            max_peak_angle_deg: self.max_peak_angle_deg,
            max_angle_settling: self.max_angle_settling,
            angle_band_deg: self.angle_band_deg,
            max_settling_time: self.max_settling_time,
            violation_weight: self.violation_weight,
            budget: self.budget,
        }
    }
}
