//! Numeric scenario fields addressable by `sweep`.

use cartpole_core::control::PidGains;
use cartpole_core::hwemu::EmbeddedPidGains;
use cartpole_core::metrics::compute_metrics;
use cartpole_core::scenario::{run_scenario, Controller, Scenario};

use crate::error::CliError;

pub const PATHS: [&str; 24] = [
    "reference",
    "disturbance",
    "duration",
    "dt",
    "seed",
    "track_half_length",
    "initial.x",
    "initial.v",
    "initial.theta",
    "initial.omega",
    "plant.cart_mass",
    "plant.pendulum_mass",
    "plant.pendulum_length",
    "plant.com_distance",
    "plant.inertia",
    "plant.gravity",
    "plant.cart_friction",
    "controller.angle_setpoint_limit",
    "controller.position.kp",
    "controller.position.ki",
    "controller.position.kd",
    "controller.angle.kp",
    "controller.angle.ki",
    "controller.angle.kd",
];

fn invalid_path(path: &str) -> CliError {
    CliError::Config(format!(
        "unknown parameter path '{path}'; valid paths: {}",
        PATHS.join(", ")
    ))
}

fn set_pid(g: &mut PidGains, term: &str, value: f64) {
    match term {
        "kp" => g.kp = value,
        "ki" => g.ki = value,
        _ => g.kd = value,
    }
}

fn set_embedded(
    g: &EmbeddedPidGains,
    term: &str,
    value: f64,
) -> Result<EmbeddedPidGains, CliError> {
    let (mut kp, mut ki, mut kd) = (g.kp(), g.ki(), g.kd());
    match term {
        "kp" => kp = value,
        "ki" => ki = value,
        _ => kd = value,
    }
    Ok(EmbeddedPidGains::new(
        kp,
        ki,
        kd,
        g.sample_period,
        g.out_max,
        g.direction,
    )?)
}

/// Returns a copy of `base` with the field at `path` set to `value`.
///
/// `plant.pendulum_mass` scales the inertia with the mass and keeps the COM
/// distance; `plant.pendulum_length` rebuilds a uniform rod.
pub fn apply(base: &Scenario, path: &str, value: f64) -> Result<Scenario, CliError> {
    let mut sc = base.clone();
    let p = sc.plant;
    match path {
        "reference" => sc.reference = sc.reference.with_final_value(value),
        "disturbance" => sc.disturbance = sc.disturbance.with_amplitude(value),
        "duration" => sc.duration = value,
        "dt" => sc.dt = value,
        "seed" => {
            if !(value >= 0.0 && value.fract() == 0.0 && value <= u64::MAX as f64) {
                return Err(CliError::Config(format!(
                    "seed must be a non-negative integer, got {value}"
                )));
            }
            sc.seed = value as u64;
        }
        "track_half_length" => sc.track_half_length = Some(value),
        "initial.x" => sc.initial.x = value,
        "initial.v" => sc.initial.v = value,
        "initial.theta" => sc.initial.theta = value,
        "initial.omega" => sc.initial.omega = value,
        "plant.cart_mass" => sc.plant = p.with_cart_mass(value)?,
        "plant.pendulum_mass" => {
            let inertia = p.inertia_com() * value / p.pendulum_mass();
            sc.plant = p
                .with_rod(value, p.pendulum_length())?
                .with_mass_distribution(p.com_distance(), inertia)?;
        }
        "plant.pendulum_length" => sc.plant = p.with_rod(p.pendulum_mass(), value)?,
        "plant.com_distance" => sc.plant = p.with_mass_distribution(value, p.inertia_com())?,
        "plant.inertia" => sc.plant = p.with_mass_distribution(p.com_distance(), value)?,
        "plant.gravity" => sc.plant = p.with_gravity(value)?,
        "plant.cart_friction" => sc.plant = p.with_cart_friction(value)?,
        "controller.angle_setpoint_limit" => match &mut sc.controller {
            Controller::Cascade(c) => {
                c.angle_setpoint_limit = value;
                c.position.out_min = -value;
                c.position.out_max = value;
            }
            Controller::Hybrid(h) => {
                h.angle_setpoint_limit = value;
                h.position.out_min = -value;
                h.position.out_max = value;
            }
            Controller::Embedded(_) => {
                return Err(CliError::Config(
                    "the embedded cascade has no angle_setpoint_limit".into(),
                ))
            }
        },
        _ => {
            let Some((loop_name, term)) = path
                .strip_prefix("controller.")
                .and_then(|r| r.split_once('.'))
            else {
                return Err(invalid_path(path));
            };
            if !PATHS.contains(&path) {
                return Err(invalid_path(path));
            }
            match (&mut sc.controller, loop_name) {
                (Controller::Cascade(c), "position") => set_pid(&mut c.position, term, value),
                (Controller::Cascade(c), _) => set_pid(&mut c.angle, term, value),
                (Controller::Hybrid(h), "position") => set_pid(&mut h.position, term, value),
                (Controller::Hybrid(_), _) => {
                    return Err(CliError::Config(
                        "the hybrid controller's angle loop is an LQR, not a PID".into(),
                    ))
                }
                (Controller::Embedded(e), "position") => {
                    e.position = set_embedded(&e.position, term, value)?
                }
                (Controller::Embedded(e), _) => e.angle = set_embedded(&e.angle, term, value)?,
            }
        }
    }
    sc.validate()?;
    Ok(sc)
}

/// One sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub value: f64,
    pub scenario: Scenario,
    pub run: cartpole_core::scenario::Run,
    pub metrics: cartpole_core::metrics::Metrics,
}

/// Runs one scenario per value, each on its own thread, in value order.
pub fn sweep(base: &Scenario, path: &str, values: &[f64]) -> Result<Vec<Row>, CliError> {
    if values.is_empty() {
        return Err(CliError::Config(format!("no values given for '{path}'")));
    }
    let scenarios = values
        .iter()
        .map(|&v| apply(base, path, v))
        .collect::<Result<Vec<_>, _>>()?;
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|sc| {
                scope.spawn(move || {
                    let run = run_scenario(sc)?;
                    let metrics = compute_metrics(&run.series, &sc.metrics_config())?;
                    Ok::<_, CliError>((run, metrics))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Vec<_>>()
    });
    values
        .iter()
        .zip(scenarios)
        .zip(results)
        .map(|((&value, scenario), result)| {
            let (run, metrics) = result?;
            Ok(Row {
                value,
                scenario,
                run,
                metrics,
            })
        })
        .collect()
}

impl Row {
    pub fn failed(&self) -> bool {
        self.run.outcome.aborted()
    }
}
