//! Emulation of the bench rig: quadrature encoder on the pivot, ultrasonic
//! ranging of the cart, PWM motor drive with a deadband remap, and the
//! embedded PID routine that ran on the microcontroller.

use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::{Error, Result};

/// Pivot encoder. Counts are zero at upright; a half turn is ±`ppr/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderModel {
    /// Counts per revolution after quadrature decoding (600 ppr × 4).
    pub pulses_per_rev: u32,
}

impl Default for EncoderModel {
    fn default() -> Self {
        Self {
            pulses_per_rev: 2400,
        }
    }
}

impl EncoderModel {
    pub fn counts_per_radian(&self) -> f64 {
        f64::from(self.pulses_per_rev) / (2.0 * PI)
    }

    pub fn encode_angle(&self, theta: f64) -> i64 {
        libm::round(theta * self.counts_per_radian()) as i64
    }

    pub fn decode_angle(&self, pulses: i64) -> f64 {
        pulses as f64 / self.counts_per_radian()
    }

    /// Largest round-trip error, half a count.
    pub fn resolution_bound(&self) -> f64 {
        PI / f64::from(self.pulses_per_rev)
    }
}

/// Ultrasonic range sensor on the cart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltrasonicModel {
    /// Gaussian noise standard deviation, m.
    pub noise_std: f64,
    /// Reported values are multiples of this, m (0 = unquantized).
    pub resolution: f64,
    /// Seconds between fresh readings; the last reading is held in between.
    pub sample_period: f64,
    pub seed: u64,
}

impl Default for UltrasonicModel {
    fn default() -> Self {
        Self {
            noise_std: 0.003,
            resolution: 0.003,
            sample_period: 0.02,
            seed: 0,
        }
    }
}

impl UltrasonicModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_std >= 0.0) || !(self.resolution >= 0.0) || !(self.sample_period > 0.0) {
            return Err(Error::InvalidScenario(
                "ultrasonic noise and resolution must be >= 0 and its period > 0".into(),
            ));
        }
        Ok(())
    }

    /// Rounds to the nearest multiple of the resolution, halves upward.
    pub fn quantize(&self, x: f64) -> f64 {
        if self.resolution > 0.0 {
            libm::floor(x / self.resolution + 0.5) * self.resolution
        } else {
            x
        }
    }

    pub fn sensor(&self) -> Result<UltrasonicSensor> {
        self.validate()?;
        let noise = Normal::new(0.0, self.noise_std)
            .map_err(|_| Error::InvalidScenario("ultrasonic noise must be finite".into()))?;
        Ok(UltrasonicSensor {
            model: *self,
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            noise,
            held: 0.0,
            next_due: 0.0,
        })
    }
}

/// Stateful sample-and-hold reader built from an [`UltrasonicModel`].
#[derive(Debug, Clone)]
pub struct UltrasonicSensor {
    model: UltrasonicModel,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    held: f64,
    next_due: f64,
}

impl UltrasonicSensor {
    /// Reading at time `t`; a fresh noisy sample is taken once per sample
    /// period, otherwise the previous one is returned.
    pub fn measure_position(&mut self, true_x: f64, t: f64) -> f64 {
        let period = self.model.sample_period;
        if t + 1e-9 * period >= self.next_due {
            let noise = if self.model.noise_std > 0.0 {
                self.noise.sample(&mut self.rng)
            } else {
                0.0
            };
            self.held = self.model.quantize(true_x + noise);
            while self.next_due <= t + 1e-9 * period {
                self.next_due += period;
            }
        }
        self.held
    }
}

/// H-bridge + DC motor seen as a PWM-to-force gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorModel {
    pub pwm_full_scale: f64,
    /// Smallest non-zero command magnitude; below it the drivetrain stalls.
    pub deadband_floor: f64,
    /// N per PWM count.
    pub force_per_pwm: f64,
}

impl Default for MotorModel {
    fn default() -> Self {
        Self {
            pwm_full_scale: 255.0,
            deadband_floor: 50.0,
            force_per_pwm: 12.0 / 255.0,
        }
    }
}

impl MotorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.pwm_full_scale > 0.0)
            || !(self.deadband_floor >= 0.0 && self.deadband_floor < self.pwm_full_scale)
            || !(self.force_per_pwm > 0.0)
        {
            return Err(Error::InvalidScenario("motor model out of range".into()));
        }
        Ok(())
    }

    /// Maps a controller output in ±full scale onto signed motor commands
    /// `{0} ∪ ±[floor, full scale]`. Exactly zero switches the motor off.
    pub fn remap_pwm(&self, u: f64) -> i32 {
        let u = u.clamp(-self.pwm_full_scale, self.pwm_full_scale);
        if u == 0.0 || u.is_nan() {
            return 0;
        }
        let span = self.pwm_full_scale - self.deadband_floor;
        let magnitude =
            libm::floor(self.deadband_floor + u.abs() * span / self.pwm_full_scale + 0.5);
        (u.signum() * magnitude) as i32
    }

    pub fn pwm_to_force(&self, command: i32) -> f64 {
        f64::from(command) * self.force_per_pwm
    }

    /// Controller units for a desired force, saturated to full scale.
    pub fn force_to_pwm(&self, force: f64) -> f64 {
        (force / self.force_per_pwm).clamp(-self.pwm_full_scale, self.pwm_full_scale)
    }
}

/// Controller action of the embedded PID routine: reverse action negates
/// all three gains, since the routine itself only accepts non-negative ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Direct,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedPidGains {
    kp: f64,
    ki: f64,
    kd: f64,
    pub sample_period: f64,
    pub out_min: f64,
    pub out_max: f64,
    pub direction: Direction,
}

impl EmbeddedPidGains {
    pub fn new(
        kp: f64,
        ki: f64,
        kd: f64,
        sample_period: f64,
        limit: f64,
        direction: Direction,
    ) -> Result<Self> {
        if !(kp >= 0.0 && ki >= 0.0 && kd >= 0.0) || !(kp + ki + kd).is_finite() {
            return Err(Error::InvalidController(
                "embedded PID gains must be finite and non-negative (the on-board PID library rejects negative gains; use reverse direction instead)".into(),
            ));
        }
        if !(sample_period > 0.0) || !(limit > 0.0) {
            return Err(Error::InvalidController(
                "embedded PID period and limit must be positive".into(),
            ));
        }
        Ok(Self {
            kp,
            ki,
            kd,
            sample_period,
            out_min: -limit,
            out_max: limit,
            direction,
        })
    }

    pub fn kp(&self) -> f64 {
        self.kp
    }
    pub fn ki(&self) -> f64 {
        self.ki
    }
    pub fn kd(&self) -> f64 {
        self.kd
    }

    fn signed(&self, k: f64) -> f64 {
        match self.direction {
            Direction::Direct => k,
            Direction::Reverse => -k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmbeddedPidMemory {
    pub integral: f64,
    pub last_measurement: f64,
}

impl EmbeddedPidMemory {
    /// Bumpless start: no derivative kick on the first sample.
    pub fn primed(measurement: f64) -> Self {
        Self {
            integral: 0.0,
            last_measurement: measurement,
        }
    }
}

/// One sample of the embedded routine: proportional on error, clamped
/// integral, derivative on measurement, no derivative filter.
pub fn embedded_pid_step(
    g: &EmbeddedPidGains,
    mem: &EmbeddedPidMemory,
    setpoint: f64,
    measurement: f64,
) -> Result<(f64, EmbeddedPidMemory)> {
    if !setpoint.is_finite() || !measurement.is_finite() {
        return Err(Error::NonFinite("embedded_pid_step"));
    }
    let error = setpoint - measurement;
    let ts = g.sample_period;
    let integral = (mem.integral + g.signed(g.ki) * ts * error).clamp(g.out_min, g.out_max);
    let d_input = measurement - mem.last_measurement;
    let output = (g.signed(g.kp) * error + integral - g.signed(g.kd) * d_input / ts)
        .clamp(g.out_min, g.out_max);
    Ok((
        output,
        EmbeddedPidMemory {
            integral,
            last_measurement: measurement,
        },
    ))
}

/// The rig's two-loop controller: cart position in cm → angle setpoint in
/// encoder counts → PWM command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedCascade {
    /// Output limits are the angle setpoint clamp, counts.
    pub position: EmbeddedPidGains,
    /// Output limits are the PWM range.
    pub angle: EmbeddedPidGains,
}

impl EmbeddedCascade {
    /// Angle samples per position sample.
    pub fn outer_divider(&self) -> Result<u64> {
        crate::control::cascade::outer_divider(
            self.angle.sample_period,
            self.position.sample_period,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmbeddedCascadeMemory {
    pub position: EmbeddedPidMemory,
    pub angle: EmbeddedPidMemory,
    /// Held angle setpoint, counts.
    pub setpoint_counts: f64,
    pub ticks: u64,
}

impl EmbeddedCascadeMemory {
    pub fn primed(position_cm: f64, angle_counts: f64) -> Self {
        Self {
            position: EmbeddedPidMemory::primed(position_cm),
            angle: EmbeddedPidMemory::primed(angle_counts),
            setpoint_counts: 0.0,
            ticks: 0,
        }
    }
}

/// One angle-loop sample; returns the PWM-scale output (before remapping).
pub fn embedded_cascade_step(
    cfg: &EmbeddedCascade,
    mem: &EmbeddedCascadeMemory,
    reference_cm: f64,
    position_cm: f64,
    angle_counts: f64,
) -> Result<(f64, EmbeddedCascadeMemory)> {
    let mut next = *mem;
    if mem.ticks.is_multiple_of(cfg.outer_divider()?) {
        let (sp, m) = embedded_pid_step(&cfg.position, &mem.position, reference_cm, position_cm)?;
        next.setpoint_counts = sp;
        next.position = m;
    }
    let (u, m) = embedded_pid_step(&cfg.angle, &mem.angle, next.setpoint_counts, angle_counts)?;
    next.angle = m;
    next.ticks += 1;
    Ok((u, next))
}

/// Sensors and actuator of the rig, bundled for scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HardwareModel {
    pub encoder: EncoderModel,
    pub ultrasonic: UltrasonicModel,
    pub motor: MotorModel,
}

impl HardwareModel {
    pub fn validate(&self) -> Result<()> {
        if self.encoder.pulses_per_rev == 0 {
            return Err(Error::InvalidScenario(
                "encoder needs at least one count per turn".into(),
            ));
        }
        self.ultrasonic.validate()?;
        self.motor.validate()
    }
}
