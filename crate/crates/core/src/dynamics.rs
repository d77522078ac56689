//! Open-loop rotational plant: `q̇ = ½ q ⊗ (0, ω)`, `ω̇ = J⁻¹(τ − ω × Jω)`.

use crate::linalg::{Mat3, Vec3};
use crate::quaternion::{Quaternion, UnitQuaternion};
use crate::{Error, Result};

pub const MAX_TIMESTEP: f64 = 0.01;

/// Attitude of the body frame relative to the inertial frame, and body rate
/// (rad/s) expressed in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState {
    pub q: UnitQuaternion,
    pub omega: Vec3,
}

impl BodyState {
    pub fn new(q: UnitQuaternion, omega: Vec3) -> Self {
        Self { q, omega }
    }

    pub fn at_rest(q: UnitQuaternion) -> Self {
        Self::new(q, Vec3::ZERO)
    }
}

/// Inertia matrix in the body frame (kg·m²) with its cached inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaModel {
    j: Mat3,
    j_inv: Mat3,
}

impl InertiaModel {
    pub fn new(j: Mat3) -> Result<Self> {
        if !j.is_symmetric_positive_definite() {
            return Err(Error::NotPositiveDefinite("inertia matrix"));
        }
        let j_inv = j
            .inverse()
            .ok_or(Error::NotPositiveDefinite("inertia matrix"))?;
        let residual = j * j_inv - Mat3::IDENTITY;
        if residual.rows.iter().flatten().any(|v| v.abs() > 1e-10) {
            return Err(Error::NotPositiveDefinite(
                "inertia matrix (ill-conditioned)",
            ));
        }
        Ok(Self { j, j_inv })
    }

    pub fn diagonal(jxx: f64, jyy: f64, jzz: f64) -> Result<Self> {
        Self::new(Mat3::diagonal(jxx, jyy, jzz))
    }

    /// Crazyflie 2.1-class placeholder, `diag(1.66e-5, 1.66e-5, 2.93e-5)` kg·m².
    pub fn crazyflie() -> Self {
        Self::diagonal(1.66e-5, 1.66e-5, 2.93e-5).expect("constant inertia is valid")
    }

    #[inline]
    pub fn matrix(&self) -> Mat3 {
        self.j
    }

    #[inline]
    pub fn inverse(&self) -> Mat3 {
        self.j_inv
    }

    pub fn kinetic_energy(&self, omega: Vec3) -> f64 {
        0.5 * self.j.quadratic_form(omega)
    }
}

#[inline]
fn euler_rate(omega: Vec3, tau: Vec3, inertia: &InertiaModel) -> Vec3 {
    inertia.j_inv * (tau - omega.cross(inertia.j * omega))
}

/// Derivative of a raw (possibly non-unit) integrator stage.
#[inline]
fn derivative_raw(
    q: Quaternion,
    omega: Vec3,
    tau: Vec3,
    inertia: &InertiaModel,
) -> (Quaternion, Vec3) {
    (
        (q * Quaternion::pure(omega)) * 0.5,
        euler_rate(omega, tau, inertia),
    )
}

pub fn angular_acceleration(state: &BodyState, tau: Vec3, inertia: &InertiaModel) -> Result<Vec3> {
    if !state.omega.is_finite() {
        return Err(Error::NonFinite("angular velocity"));
    }
    if !tau.is_finite() {
        return Err(Error::NonFinite("torque"));
    }
    Ok(euler_rate(state.omega, tau, inertia))
}

/// `(q̇, ω̇)`; `q̇` is returned as a raw 4-vector and is not renormalized.
pub fn state_derivative(
    state: &BodyState,
    tau: Vec3,
    inertia: &InertiaModel,
) -> Result<(Quaternion, Vec3)> {
    let omega_dot = angular_acceleration(state, tau, inertia)?;
    let q_dot = (state.q.as_quaternion() * Quaternion::pure(state.omega)) * 0.5;
    Ok((q_dot, omega_dot))
}

/// One classical RK4 step with the torque held over the step. Returns the
/// quaternion before renormalization.
fn rk4_raw(state: &BodyState, tau: Vec3, inertia: &InertiaModel, dt: f64) -> (Quaternion, Vec3) {
    let q0 = state.q.as_quaternion();
    let w0 = state.omega;
    let half = 0.5 * dt;

    let (k1q, k1w) = derivative_raw(q0, w0, tau, inertia);
    let (k2q, k2w) = derivative_raw(q0 + k1q * half, w0 + k1w * half, tau, inertia);
    let (k3q, k3w) = derivative_raw(q0 + k2q * half, w0 + k2w * half, tau, inertia);
    let (k4q, k4w) = derivative_raw(q0 + k3q * dt, w0 + k3w * dt, tau, inertia);

    let sixth = dt / 6.0;
    let q = q0 + (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * sixth;
    let w = w0 + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * sixth;
    (q, w)
}

pub fn integrate_step(
    state: &BodyState,
    tau: Vec3,
    inertia: &InertiaModel,
    dt: f64,
) -> Result<BodyState> {
    if !(dt > 0.0 && dt <= MAX_TIMESTEP) {
        return Err(Error::InvalidTimestep { dt });
    }
    if !tau.is_finite() {
        return Err(Error::NonFinite("torque"));
    }
    let (q, omega) = rk4_raw(state, tau, inertia, dt);
    if !omega.is_finite() {
        return Err(Error::NonFinite("angular velocity"));
    }
    Ok(BodyState::new(UnitQuaternion::normalize(q)?, omega))
}
