//! The six named experiments and the gain sets they use.
//!
//! S1–S5 run [`tuned_cascade`]. The reference simulation set is
//! [`reference_cascade`]; on this plant it loses the pendulum within a
//! second of the S1 step.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::control::cascade::DEFAULT_ANGLE_SETPOINT_LIMIT;
use crate::control::{CascadeConfig, LqrFeedback, LqrWeights, PidGains};
use crate::hwemu::{Direction, EmbeddedCascade, EmbeddedPidGains, EncoderModel, HardwareModel};
use crate::plant::{DisturbanceSite, PlantParams, State};
use crate::scenario::{Controller, HybridSpec, Scenario, Sensing};
use crate::signal::Signal;

/// Simulation controllers run every millisecond, like the integrator.
pub const SIMULATION_TS: f64 = 1e-3;
/// Embedded loop period, s.
pub const EMBEDDED_TS: f64 = 0.005;
/// Cart-force saturation, N.
pub const FORCE_LIMIT: f64 = 12.0;
/// Commands of the S2 position-tracking family, m.
pub const S2_COMMANDS: [f64; 4] = [0.10, 0.20, 0.25, 0.30];
/// Physical half length of the bench track, m.
pub const BENCH_TRACK_HALF_LENGTH: f64 = 0.25;
/// Half length needed by the heavy pendulum, m.
pub const HEAVY_TRACK_HALF_LENGTH: f64 = 0.80;
/// Viscous cart friction assumed for the hardware runs, N·s/m.
pub const HARDWARE_CART_FRICTION: f64 = 0.5;

/// `(kp, ki, kd, filter_n)`.
pub type PidTerms = (f64, f64, f64, f64);

pub const REFERENCE_POSITION: PidTerms = (-0.03, 0.0, -0.24, 9.48);
pub const REFERENCE_ANGLE: PidTerms = (204.26, 0.0, 3.70, 75.3);

pub const TUNED_POSITION: PidTerms = (-0.059, 0.0, -0.224, 5.6);
pub const TUNED_ANGLE: PidTerms = (23.5, 0.0, 3.34, 75.0);

/// Rig firmware gains `(kp, ki, kd)`: angle loop in PWM per count, position
/// loop in counts per cm.
pub const EXPERIMENTAL_ANGLE: (f64, f64, f64) = (30.0, 28.6, 0.1);
pub const EXPERIMENTAL_POSITION: (f64, f64, f64) = (0.1945, 0.0, 0.000357);

/// LQR feedback wiring used by S5.
pub const S5_FEEDBACK: LqrFeedback = LqrFeedback::FullState;

fn cascade(position: PidTerms, angle: PidTerms, setpoint_limit: f64) -> CascadeConfig {
    let pid = |(kp, ki, kd, n): PidTerms, limit| {
        PidGains::new(kp, ki, kd, n, limit, SIMULATION_TS).expect("catalog gains are valid")
    };
    CascadeConfig::new(
        pid(position, setpoint_limit),
        pid(angle, FORCE_LIMIT),
        setpoint_limit,
    )
    .expect("catalog cascade is valid")
}

/// The reference simulation tuning (integral terms zero).
pub fn reference_cascade() -> CascadeConfig {
    cascade(
        REFERENCE_POSITION,
        REFERENCE_ANGLE,
        DEFAULT_ANGLE_SETPOINT_LIMIT,
    )
}

/// Gains used by S1–S5.
pub fn tuned_cascade() -> CascadeConfig {
    cascade(TUNED_POSITION, TUNED_ANGLE, DEFAULT_ANGLE_SETPOINT_LIMIT)
}

/// The rig firmware: angle loop reverse-acting, position loop direct.
pub fn experimental_cascade() -> EmbeddedCascade {
    let setpoint_limit =
        libm::round(DEFAULT_ANGLE_SETPOINT_LIMIT * EncoderModel::default().counts_per_radian());
    let (akp, aki, akd) = EXPERIMENTAL_ANGLE;
    let (pkp, pki, pkd) = EXPERIMENTAL_POSITION;
    EmbeddedCascade {
        position: EmbeddedPidGains::new(
            pkp,
            pki,
            pkd,
            EMBEDDED_TS,
            setpoint_limit,
            Direction::Direct,
        )
        .expect("catalog gains are valid"),
        angle: EmbeddedPidGains::new(akp, aki, akd, EMBEDDED_TS, 255.0, Direction::Reverse)
            .expect("catalog gains are valid"),
    }
}

/// Hybrid controller of S5 with the tuned outer loop.
pub fn hybrid_spec() -> HybridSpec {
    let c = tuned_cascade();
    HybridSpec {
        position: c.position,
        angle_setpoint_limit: c.angle_setpoint_limit,
        weights: LqrWeights::reference(),
        feedback: S5_FEEDBACK,
        force_limit: FORCE_LIMIT,
        ts: SIMULATION_TS,
    }
}

/// Listing metadata for a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub name: &'static str,
    pub figure: &'static str,
    pub description: &'static str,
}

pub const ENTRIES: [Entry; 6] = [
    Entry {
        name: "S1",
        figure: "Fig. 6",
        description: "10 cm step, light pendulum, cascade PID",
    },
    Entry {
        name: "S2",
        figure: "Fig. 10",
        description: "step family 10/20/25/30 cm on a ±25 cm track",
    },
    Entry {
        name: "S3",
        figure: "Fig. 11",
        description: "1 N push for 1 s on the light pendulum (fails)",
    },
    Entry {
        name: "S4",
        figure: "Fig. 12",
        description: "same push, 0.6 kg / 0.5 m pendulum, ±80 cm track",
    },
    Entry {
        name: "S5",
        figure: "Fig. 13",
        description: "S4 with an LQR angle loop behind the position PID",
    },
    Entry {
        name: "S6",
        figure: "Figs. 8-9",
        description: "rig emulation, 8° release, 7 → 10 cm",
    },
];

fn push() -> Signal {
    Signal::pulse(6.0, 7.0, 1.0).expect("valid pulse")
}

fn simulated(name: &str, plant: PlantParams, duration: f64) -> Scenario {
    Scenario {
        name: String::from(name),
        plant,
        controller: Controller::Cascade(tuned_cascade()),
        sensing: Sensing::Ideal,
        reference: Signal::step(0.0, 0.10),
        disturbance: Signal::zero(),
        disturbance_site: DisturbanceSite::PendulumCom,
        initial: State::UPRIGHT,
        duration,
        dt: SIMULATION_TS,
        track_half_length: None,
        seed: 0,
    }
}

/// The six named scenarios, S1 to S6.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let s1 = simulated("S1", PlantParams::bench_rig(), 15.0);
    let s2 = Scenario {
        name: "S2".into(),
        track_half_length: Some(BENCH_TRACK_HALF_LENGTH),
        ..s1.clone()
    };
    let s3 = Scenario {
        name: "S3".into(),
        disturbance: push(),
        ..s1.clone()
    };
    let s4 = Scenario {
        disturbance: push(),
        track_half_length: Some(HEAVY_TRACK_HALF_LENGTH),
        ..simulated("S4", PlantParams::heavy_pendulum(), 40.0)
    };
    let s5 = Scenario {
        name: "S5".into(),
        controller: Controller::Hybrid(hybrid_spec()),
        track_half_length: None,
        ..s4.clone()
    };
    let s6 = Scenario {
        name: "S6".into(),
        plant: PlantParams::bench_rig()
            .with_cart_friction(HARDWARE_CART_FRICTION)
            .expect("valid friction"),
        controller: Controller::Embedded(experimental_cascade()),
        sensing: Sensing::Hardware(HardwareModel::default()),
        initial: State::new(0.07, 0.0, 8.0 * PI / 180.0, 0.0),
        seed: 1,
        ..s1.clone()
    };
    alloc::vec![s1, s2, s3, s4, s5, s6]
}

/// Looks a scenario up by name (case-insensitive).
pub fn scenario(name: &str) -> Option<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
}

pub fn entry(name: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.name.eq_ignore_ascii_case(name))
}

/// S2 expanded over [`S2_COMMANDS`].
pub fn s2_family() -> Vec<Scenario> {
    let base = scenario("S2").expect("S2 exists");
    S2_COMMANDS
        .iter()
        .map(|&r| Scenario {
            reference: base.reference.clone().with_final_value(r),
            ..base.clone()
        })
        .collect()
}
