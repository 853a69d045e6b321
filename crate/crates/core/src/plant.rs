//! Planar cart-pole: a uniform rod on a revolute joint carried by a cart on a
//! horizontal rail.
//!
//! Coordinates: `x` is the cart position (positive to the right), `theta` the
//! rod angle from upright (0 = balanced, ±π = hanging). A positive angle puts
//! the rod's centre of mass at `x + lc·sin(theta)`, i.e. leaning toward +x.
//! The coupled equations are
//!
//! ```text
//! (M+m)·ẍ + m·lc·cosθ·θ̈ − m·lc·sinθ·ω² + b·v = F + Fp
//! (I+m·lc²)·θ̈ + m·lc·cosθ·ẍ − m·g·lc·sinθ   = Fp·lc·cosθ
//! ```
//!
//! where `F` is the horizontal force on the cart and `Fp` an optional
//! horizontal push applied at the rod's centre of mass.

use core::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};

use crate::{Error, Result};

/// Physical parameters of the cart-pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    cart_mass: f64,
    pendulum_mass: f64,
    pendulum_length: f64,
    com_distance: f64,
    inertia_com: f64,
    gravity: f64,
    cart_friction: f64,
}

pub const STANDARD_GRAVITY: f64 = 9.81;

impl PlantParams {
    /// Builds and validates a parameter set.
    ///
    /// `inertia_com` is the rod inertia about its own centre of mass and
    /// `com_distance` the pivot-to-COM distance.
    pub fn new(
        cart_mass: f64,
        pendulum_mass: f64,
        pendulum_length: f64,
        com_distance: f64,
        inertia_com: f64,
    ) -> Result<Self> {
        Self {
            cart_mass,
            pendulum_mass,
            pendulum_length,
            com_distance,
            inertia_com,
            gravity: STANDARD_GRAVITY,
            cart_friction: 0.0,
        }
        .validated()
    }

    /// Uniform rod pivoted at one end: `lc = l/2`, `I = m·l²/12`.
    pub fn uniform_rod(cart_mass: f64, pendulum_mass: f64, pendulum_length: f64) -> Result<Self> {
        Self::new(
            cart_mass,
            pendulum_mass,
            pendulum_length,
            pendulum_length / 2.0,
            rod_inertia(pendulum_mass, pendulum_length),
        )
    }

    /// The bench rig: 0.5672 kg cart, 0.0374 kg / 0.38 m rod with the
    /// tabulated inertia 4.5017e-4 kg·m².
    pub fn bench_rig() -> Self {
        Self::new(0.5672, 0.0374, 0.38, 0.19, 4.5017e-4).expect("bench rig parameters are valid")
    }

    /// Bench cart with the heavier 0.6 kg / 0.5 m rod (inertia and COM
    /// recomputed for a uniform rod).
    pub fn heavy_pendulum() -> Self {
        Self::uniform_rod(0.5672, 0.6, 0.5).expect("heavy pendulum parameters are valid")
    }

    pub fn with_gravity(mut self, gravity: f64) -> Result<Self> {
        self.gravity = gravity;
        self.validated()
    }

    pub fn with_cart_friction(mut self, b: f64) -> Result<Self> {
        self.cart_friction = b;
        self.validated()
    }

    pub fn with_cart_mass(mut self, cart_mass: f64) -> Result<Self> {
        self.cart_mass = cart_mass;
        self.validated()
    }

    /// Replaces the rod with a uniform rod of the given mass and length,
    /// recomputing COM distance and inertia.
    pub fn with_rod(mut self, pendulum_mass: f64, pendulum_length: f64) -> Result<Self> {
        self.pendulum_mass = pendulum_mass;
        self.pendulum_length = pendulum_length;
        self.com_distance = pendulum_length / 2.0;
        self.inertia_com = rod_inertia(pendulum_mass, pendulum_length);
        self.validated()
    }

    /// Overrides COM distance and inertia explicitly.
    pub fn with_mass_distribution(mut self, com_distance: f64, inertia_com: f64) -> Result<Self> {
        self.com_distance = com_distance;
        self.inertia_com = inertia_com;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        let checks: [(bool, &str); 7] = [
            (self.cart_mass > 0.0, "cart mass must be positive"),
            (self.pendulum_mass > 0.0, "pendulum mass must be positive"),
            (
                self.pendulum_length > 0.0,
                "pendulum length must be positive",
            ),
            (
                self.com_distance > 0.0 && self.com_distance <= self.pendulum_length,
                "COM distance must lie in (0, length]",
            ),
            (self.inertia_com > 0.0, "inertia must be positive"),
            (self.gravity > 0.0, "gravity must be positive"),
            (
                self.cart_friction >= 0.0,
                "cart friction must be non-negative",
            ),
        ];
        for (ok, msg) in checks {
            // NaN fails every comparison above, so it lands here too.
            if !ok {
                return Err(Error::InvalidPlant(msg.into()));
            }
        }
        Ok(self)
    }

    pub fn cart_mass(&self) -> f64 {
        self.cart_mass
    }
    pub fn pendulum_mass(&self) -> f64 {
        self.pendulum_mass
    }
    pub fn pendulum_length(&self) -> f64 {
        self.pendulum_length
    }
    pub fn com_distance(&self) -> f64 {
        self.com_distance
    }
    pub fn inertia_com(&self) -> f64 {
        self.inertia_com
    }
    pub fn gravity(&self) -> f64 {
        self.gravity
    }
    pub fn cart_friction(&self) -> f64 {
        self.cart_friction
    }

    /// Rod inertia about the pivot, `I + m·lc²`.
    pub fn pivot_inertia(&self) -> f64 {
        self.inertia_com + self.pendulum_mass * self.com_distance * self.com_distance
    }

    /// Determinant of the 2×2 mass matrix at angle `theta`.
    pub fn mass_matrix_det(&self, theta: f64) -> f64 {
        let coupling = self.pendulum_mass * self.com_distance * libm::cos(theta);
        (self.cart_mass + self.pendulum_mass) * self.pivot_inertia() - coupling * coupling
    }
}

/// `m·l²/12`.
pub fn rod_inertia(mass: f64, length: f64) -> f64 {
    mass * length * length / 12.0
}

/// Cart-pole state. `theta` is kept unwrapped; use [`wrap_angle`] for display.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub x: f64,
    pub v: f64,
    pub theta: f64,
    pub omega: f64,
}

impl State {
    pub const UPRIGHT: State = State {
        x: 0.0,
        v: 0.0,
        theta: 0.0,
        omega: 0.0,
    };
    pub const HANGING: State = State {
        x: 0.0,
        v: 0.0,
        theta: PI,
        omega: 0.0,
    };

    pub fn new(x: f64, v: f64, theta: f64, omega: f64) -> Self {
        Self { x, v, theta, omega }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.v, self.theta, self.omega]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }
}

/// Reduces an angle to (-π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let r = libm::remainder(theta, 2.0 * PI);
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Where the external disturbance force acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisturbanceSite {
    /// Summed with the actuator force on the cart.
    #[default]
    Cart,
    /// Horizontal push at the rod's centre of mass.
    PendulumCom,
}

/// Cart and rod accelerations for a total horizontal cart force.
pub fn accelerations(p: &PlantParams, s: &State, force_total: f64) -> (f64, f64) {
    accelerations_with_push(p, s, force_total, 0.0)
}

/// Accelerations with a cart force and a horizontal push at the rod COM.
pub fn accelerations_with_push(
    p: &PlantParams,
    s: &State,
    cart_force: f64,
    push: f64,
) -> (f64, f64) {
    let (sin, cos) = libm::sincos(s.theta);
    let m_lc = p.pendulum_mass * p.com_distance;
    let a11 = p.cart_mass + p.pendulum_mass;
    let a12 = m_lc * cos;
    let a22 = p.pivot_inertia();
    let r1 = cart_force + push + m_lc * sin * s.omega * s.omega - p.cart_friction * s.v;
    let r2 = m_lc * p.gravity * sin + push * p.com_distance * cos;
    let det = a11 * a22 - a12 * a12;
    ((a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det)
}

fn derivative(p: &PlantParams, s: &State, cart_force: f64, push: f64) -> [f64; 4] {
    let (xdd, thetadd) = accelerations_with_push(p, s, cart_force, push);
    [s.v, xdd, s.omega, thetadd]
}

fn rk4(p: &PlantParams, s: &State, cart_force: f64, push: f64, dt: f64) -> Result<State> {
    let y = s.to_array();
    let offset =
        |k: &[f64; 4], h: f64| State::from_array(core::array::from_fn(|i| y[i] + h * k[i]));
    let k1 = derivative(p, s, cart_force, push);
    let k2 = derivative(p, &offset(&k1, dt / 2.0), cart_force, push);
    let k3 = derivative(p, &offset(&k2, dt / 2.0), cart_force, push);
    let k4 = derivative(p, &offset(&k3, dt), cart_force, push);
    let next = State::from_array(core::array::from_fn(|i| {
        y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }));
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFiniteState {
            from: *s,
            force: cart_force + push,
            dt,
        })
    }
}

/// One classical RK4 step with `force + disturbance` held on the cart.
pub fn step(p: &PlantParams, s: &State, force: f64, disturbance: f64, dt: f64) -> Result<State> {
    check_dt(dt)?;
    rk4(p, s, force + disturbance, 0.0, dt)
}

/// One RK4 step with the disturbance applied at the given site.
pub fn step_at(
    p: &PlantParams,
    s: &State,
    force: f64,
    disturbance: f64,
    site: DisturbanceSite,
    dt: f64,
) -> Result<State> {
    match site {
        DisturbanceSite::Cart => step(p, s, force, disturbance, dt),
        DisturbanceSite::PendulumCom => {
            check_dt(dt)?;
            rk4(p, s, force, disturbance, dt)
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidScenario(
            "time step must be positive and finite".into(),
        ))
    }
}

/// Continuous-time linearization about upright rest, state order
/// `[x, v, theta, omega]`, input = cart force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
}

/// Analytic Jacobian of the dynamics at `(x, 0, 0, 0)`.
pub fn linearize(p: &PlantParams) -> LinearModel {
    let m_lc = p.pendulum_mass * p.com_distance;
    let total = p.cart_mass + p.pendulum_mass;
    let j = p.pivot_inertia();
    let d = total * j - m_lc * m_lc;
    let mut a = Matrix4::zeros();
    a[(0, 1)] = 1.0;
    a[(2, 3)] = 1.0;
    a[(1, 1)] = -j * p.cart_friction / d;
    a[(1, 2)] = -m_lc * m_lc * p.gravity / d;
    a[(3, 1)] = m_lc * p.cart_friction / d;
    a[(3, 2)] = total * m_lc * p.gravity / d;
    let b = Vector4::new(0.0, j / d, 0.0, -m_lc / d);
    LinearModel { a, b }
}

/// Total mechanical energy, potential zero at pivot height.
pub fn energy(p: &PlantParams, s: &State) -> f64 {
    let cos = libm::cos(s.theta);
    let m_lc = p.pendulum_mass * p.com_distance;
    let kinetic = 0.5 * (p.cart_mass + p.pendulum_mass) * s.v * s.v
        + m_lc * s.v * s.omega * cos
        + 0.5 * p.pivot_inertia() * s.omega * s.omega;
    kinetic + m_lc * p.gravity * cos
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_force_from_rest() {
        // Frozen from a 30-digit solve of the 2x2 mass-matrix system.
        let (xdd, thetadd) = accelerations(&PlantParams::bench_rig(), &State::UPRIGHT, 1.0);
        assert_relative_eq!(xdd, 1.734_449_166_696_845_7, max_relative = 1e-12);
        assert_relative_eq!(thetadd, -6.846_040_836_604_688, max_relative = 1e-12);
    }

    #[test]
    fn equilibria_are_at_rest() {
        let p = PlantParams::bench_rig();
        for s in [State::UPRIGHT, State::HANGING] {
            let (xdd, thetadd) = accelerations(&p, &s, 0.0);
            assert!(xdd.abs() < 1e-12 && thetadd.abs() < 1e-12);
            let next = step(&p, &s, 0.0, 0.0, 1e-3).unwrap();
            // sin(π) is not exactly zero in floating point.
            for (a, b) in next.to_array().iter().zip(s.to_array()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(PlantParams::new(0.0, 0.1, 0.3, 0.15, 1e-3).is_err());
        assert!(PlantParams::new(1.0, 0.1, 0.3, 0.31, 1e-3).is_err());
        assert!(PlantParams::new(1.0, 0.1, 0.3, 0.15, f64::NAN).is_err());
        assert!(PlantParams::bench_rig().with_cart_friction(-0.1).is_err());
        assert!(PlantParams::bench_rig().with_gravity(0.0).is_err());
    }

    #[test]
    fn heavy_rod_geometry() {
        let p = PlantParams::heavy_pendulum();
        assert_relative_eq!(p.inertia_com(), 0.0125, max_relative = 1e-12);
        assert_relative_eq!(p.com_distance(), 0.25);
    }

    #[test]
    fn energy_at_rest() {
        let p = PlantParams::bench_rig();
        assert_relative_eq!(
            energy(&p, &State::UPRIGHT),
            0.069_709_86,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            energy(&p, &State::HANGING),
            -0.069_709_86,
            max_relative = 1e-9
        );
    }

    #[test]
    fn wrap_angle_range() {
        assert_relative_eq!(wrap_angle(3.0 * PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(0.5 - 4.0 * PI), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn disturbance_channel_is_additive() {
        let p = PlantParams::bench_rig();
        let s = State::new(0.01, -0.2, 0.1, 0.3);
        assert_eq!(step(&p, &s, 1.5, 0.25, 1e-3), step(&p, &s, 1.75, 0.0, 1e-3));
    }

    #[test]
    fn non_finite_state_is_reported() {
        let p = PlantParams::bench_rig();
        let s = State::new(0.0, f64::INFINITY, 0.0, 0.0);
        assert!(matches!(
            step(&p, &s, 0.0, 0.0, 1e-3),
            Err(Error::NonFiniteState { .. })
        ));
        assert!(step(&p, &State::UPRIGHT, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn com_push_tilts_rod_forward() {
        let p = PlantParams::heavy_pendulum();
        let (_, thetadd) = accelerations_with_push(&p, &State::UPRIGHT, 0.0, 1.0);
        assert!(thetadd > 0.0);
    }
}
