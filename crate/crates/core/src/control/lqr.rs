//! LQR state feedback and the PID-position / LQR-angle hybrid.

use nalgebra::{DMatrix, Matrix4, RowVector4};

use super::care::care_solve;
use super::cascade::{outer_divider, outer_update};
use super::pid::{PidGains, PidMemory};
use crate::plant::{LinearModel, State};
use crate::{Error, Result};

/// State weight and input weight of `∫ xᵀQx + R·F² dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqrWeights {
    pub q: Matrix4<f64>,
    pub r: f64,
}

impl LqrWeights {
    /// `∫ (x² + 2θ² + 0.001·F²) dt`.
    pub fn reference() -> Self {
        Self::diagonal([1.0, 0.0, 2.0, 0.0], 0.001)
    }

    pub fn diagonal(q: [f64; 4], r: f64) -> Self {
        Self {
            q: Matrix4::from_diagonal(&q.into()),
            r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidController(
                "LQR input weight must be positive".into(),
            ));
        }
        if self.q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidController(
                "LQR state weight must be finite".into(),
            ));
        }
        if (self.q - self.q.transpose()).norm() > 1e-12 * self.q.norm().max(1.0) {
            return Err(Error::InvalidController(
                "LQR state weight must be symmetric".into(),
            ));
        }
        if self
            .q
            .symmetric_eigenvalues()
            .iter()
            .any(|&l| l < -1e-12 * self.q.norm().max(1.0))
        {
            return Err(Error::InvalidController(
                "LQR state weight must be positive semidefinite".into(),
            ));
        }
        Ok(())
    }
}

/// A designed LQR: weights plus the resulting gain row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqrConfig {
    pub k: RowVector4<f64>,
    pub weights: LqrWeights,
}

impl LqrConfig {
    /// Solves the Riccati equation and checks that `A − BK` is Hurwitz.
    pub fn design(model: &LinearModel, weights: LqrWeights) -> Result<Self> {
        let k = lqr_gain(model, &weights.q, weights.r)?;
        if spectral_abscissa(&closed_loop(model, &k)) >= 0.0 {
            return Err(Error::RiccatiFailed(
                "LQR gain does not stabilize the linear model".into(),
            ));
        }
        Ok(Self { k, weights })
    }
}

/// `K = R⁻¹BᵀP`.
pub fn lqr_gain(model: &LinearModel, q: &Matrix4<f64>, r: f64) -> Result<RowVector4<f64>> {
    LqrWeights { q: *q, r }.validate()?;
    let a = DMatrix::from_iterator(4, 4, model.a.iter().copied());
    let b = DMatrix::from_iterator(4, 1, model.b.iter().copied());
    let q = DMatrix::from_iterator(4, 4, q.iter().copied());
    let p = care_solve(&a, &b, &q, &DMatrix::from_element(1, 1, r))?;
    let k = b.transpose() * p / r;
    Ok(RowVector4::from_iterator(k.iter().copied()))
}

/// `A − B·K`.
pub fn closed_loop(model: &LinearModel, k: &RowVector4<f64>) -> Matrix4<f64> {
    model.a - model.b * k
}

/// Largest real part over the eigenvalues of `m`.
pub fn spectral_abscissa(m: &Matrix4<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Which state channels the LQR acts on in the hybrid loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LqrFeedback {
    /// `−K·[x − x_ref, v, θ − θ_sp, ω]`.
    #[default]
    FullState,
    /// `−K₂·(θ − θ_sp) − K₃·ω`: the LQR only replaces the angle controller
    /// and cart position is left entirely to the outer PID.
    AngleOnly,
}

/// Outer position PID feeding an LQR inner loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    pub position: PidGains,
    pub angle_setpoint_limit: f64,
    pub lqr: LqrConfig,
    pub feedback: LqrFeedback,
    /// Symmetric force saturation, N.
    pub force_limit: f64,
    /// LQR sample period, s.
    pub ts: f64,
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        self.position.validate()?;
        self.lqr.weights.validate()?;
        if !(self.angle_setpoint_limit > 0.0) || !(self.force_limit > 0.0) || !(self.ts > 0.0) {
            return Err(Error::InvalidController(
                "hybrid limits and sample period must be positive".into(),
            ));
        }
        outer_divider(self.ts, self.position.ts).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HybridMemory {
    pub position: PidMemory,
    pub angle_setpoint: f64,
    pub ticks: u64,
}

/// One LQR sample; returns `(force, angle setpoint, memory)`.
pub fn hybrid_step(
    cfg: &HybridConfig,
    mem: &HybridMemory,
    x_ref: f64,
    meas: &State,
) -> Result<(f64, f64, HybridMemory)> {
    if !meas.is_finite() {
        return Err(Error::NonFinite("hybrid_step"));
    }
    let mut next = *mem;
    let divider = outer_divider(cfg.ts, cfg.position.ts)?;
    if mem.ticks.is_multiple_of(divider) {
        next.angle_setpoint = outer_update(
            &cfg.position,
            cfg.angle_setpoint_limit,
            &mut next.position,
            x_ref,
            meas.x,
        )?;
    }
    let k = &cfg.lqr.k;
    let angle_part = k[2] * (meas.theta - next.angle_setpoint) + k[3] * meas.omega;
    let u = match cfg.feedback {
        LqrFeedback::FullState => -(k[0] * (meas.x - x_ref) + k[1] * meas.v + angle_part),
        LqrFeedback::AngleOnly => -angle_part,
    };
    next.ticks += 1;
    Ok((
        u.clamp(-cfg.force_limit, cfg.force_limit),
        next.angle_setpoint,
        next,
    ))
}
