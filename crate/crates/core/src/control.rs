//! Attitude error and the quaternion torque laws.
//!
//! All three laws share the structure
//!
//! ```text
//! τ = s·K_n n_e + K_ω ω_e + J ω̇_d + ω × Jω
//! ```
//!
//! and differ only in the sign `s` of the proportional term: `+1` for the
//! continuous law, `sgn(m_e)` for the benchmark law and a selected `σ` for
//! the MPS law.

use crate::dynamics::{BodyState, InertiaModel};
use crate::linalg::{Mat3, Vec3};
use crate::quaternion::{Quaternion, UnitQuaternion};
use crate::{Error, Result};

const TANGENCY_TOLERANCE: f64 = 1e-9;
const RATE_SCALAR_TOLERANCE: f64 = 1e-6;

/// Sign applied to the proportional quaternion term. `Positive` stabilizes
/// `q_e = +1`, `Negative` stabilizes `q_e = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sigma {
    #[default]
    Positive,
    Negative,
}

impl Sigma {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sigma::Positive => 1.0,
            Sigma::Negative => -1.0,
        }
    }

    /// `sgn(x)` with `sgn(0) = +1`.
    #[inline]
    pub fn sign_of(x: f64) -> Sigma {
        if x < 0.0 {
            Sigma::Negative
        } else {
            Sigma::Positive
        }
    }

    pub fn flipped(self) -> Sigma {
        match self {
            Sigma::Positive => Sigma::Negative,
            Sigma::Negative => Sigma::Positive,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sigma::Positive => 1,
            Sigma::Negative => -1,
        }
    }
}

impl TryFrom<f64> for Sigma {
    type Error = Error;

    fn try_from(v: f64) -> Result<Sigma> {
        if v == 1.0 {
            Ok(Sigma::Positive)
        } else if v == -1.0 {
            Ok(Sigma::Negative)
        } else {
            Err(Error::InvalidSigma(v))
        }
    }
}

impl TryFrom<i64> for Sigma {
    type Error = Error;

    fn try_from(v: i64) -> Result<Sigma> {
        Sigma::try_from(v as f64)
    }
}

/// `(m_e, n_e)` is the attitude-error quaternion `q⁻¹ ⊗ q_d`; `omega_e = ω_d − ω`
/// in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeError {
    pub m_e: f64,
    pub n_e: Vec3,
    pub omega_e: Vec3,
}

impl AttitudeError {
    pub fn quaternion(&self) -> UnitQuaternion {
        UnitQuaternion::normalize(Quaternion::new(self.m_e, self.n_e))
            .expect("attitude error is built from a unit quaternion")
    }
}

/// One sample of the attitude reference. `omega_d` and `omega_d_rate` are
/// already expressed in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub q_d: UnitQuaternion,
    pub q_d_rate: Quaternion,
    pub omega_d: Vec3,
    pub omega_d_rate: Vec3,
}

impl ReferenceSample {
    pub fn new(
        q_d: UnitQuaternion,
        q_d_rate: Quaternion,
        omega_d: Vec3,
        omega_d_rate: Vec3,
    ) -> Result<Self> {
        if !q_d_rate.is_finite() || !omega_d.is_finite() || !omega_d_rate.is_finite() {
            return Err(Error::NonFinite("reference sample"));
        }
        let tangency = q_d.as_quaternion().dot(q_d_rate);
        if tangency.abs() > TANGENCY_TOLERANCE {
            return Err(Error::NonTangentRate { scalar: tangency });
        }
        Ok(Self {
            q_d,
            q_d_rate,
            omega_d,
            omega_d_rate,
        })
    }

    /// Constant attitude with zero rates.
    pub fn hold(q_d: UnitQuaternion) -> Self {
        Self {
            q_d,
            q_d_rate: Quaternion::ZERO,
            omega_d: Vec3::ZERO,
            omega_d_rate: Vec3::ZERO,
        }
    }

    /// Builds the sample seen from body attitude `q`, given the desired-frame
    /// rate derivative `omega_hat_d_rate`. Both rates go through `Sᵀ S_d`.
    pub fn from_desired(
        q: &UnitQuaternion,
        q_d: UnitQuaternion,
        q_d_rate: Quaternion,
        omega_hat_d_rate: Vec3,
    ) -> Result<Self> {
        let omega_d = desired_body_rate(q, &q_d, q_d_rate)?;
        let omega_d_rate = frame_transfer(q, &q_d) * omega_hat_d_rate;
        Self::new(q_d, q_d_rate, omega_d, omega_d_rate)
    }
}

/// `Sᵀ S_d`: desired body frame to actual body frame.
fn frame_transfer(q: &UnitQuaternion, q_d: &UnitQuaternion) -> Mat3 {
    q.rotation_matrix().transpose() * q_d.rotation_matrix()
}

/// Desired angular velocity in the body frame: `(0, ω̂_d) = 2 q_d⁻¹ ⊗ q̇_d`,
/// then `ω_d = Sᵀ S_d ω̂_d`.
pub fn desired_body_rate(
    q: &UnitQuaternion,
    q_d: &UnitQuaternion,
    q_d_rate: Quaternion,
) -> Result<Vec3> {
    let p = (q_d.inverse().as_quaternion() * q_d_rate) * 2.0;
    if !p.is_finite() {
        return Err(Error::NonFinite("reference rate"));
    }
    if p.w.abs() > RATE_SCALAR_TOLERANCE {
        return Err(Error::NonTangentRate { scalar: p.w });
    }
    Ok(frame_transfer(q, q_d) * p.v)
}

pub fn attitude_error(
    q: &UnitQuaternion,
    reference: &ReferenceSample,
    omega: Vec3,
) -> AttitudeError {
    let q_e = q.inverse() * reference.q_d;
    AttitudeError {
        m_e: q_e.w(),
        n_e: q_e.v(),
        omega_e: reference.omega_d - omega,
    }
}

/// Positive-definite proportional (N·m) and derivative (N·m·s/rad) gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    k_n: Mat3,
    k_omega: Mat3,
}

impl ControllerGains {
    pub fn new(k_n: Mat3, k_omega: Mat3) -> Result<Self> {
        if !k_n.is_symmetric_positive_definite() {
            return Err(Error::NotPositiveDefinite("K_n"));
        }
        if !k_omega.is_symmetric_positive_definite() {
            return Err(Error::NotPositiveDefinite("K_omega"));
        }
        Ok(Self { k_n, k_omega })
    }

    /// `K_n = kn·J`, `K_ω = kw·J`.
    pub fn inertia_multiples(inertia: &InertiaModel, kn: f64, kw: f64) -> Result<Self> {
        Self::new(inertia.matrix().scaled(kn), inertia.matrix().scaled(kw))
    }

    /// The flight-test gains `K_n = 900·J`, `K_ω = 90·J`.
    pub fn flight_test(inertia: &InertiaModel) -> Self {
        Self::inertia_multiples(inertia, 900.0, 90.0).expect("inertia is positive definite")
    }

    pub fn k_n(&self) -> Mat3 {
        self.k_n
    }

    pub fn k_omega(&self) -> Mat3 {
        self.k_omega
    }
}

#[inline]
fn signed_torque(
    sign: f64,
    err: &AttitudeError,
    state: &BodyState,
    reference: &ReferenceSample,
    gains: &ControllerGains,
    inertia: &InertiaModel,
) -> Vec3 {
    let j = inertia.matrix();
    (gains.k_n * err.n_e) * sign
        + gains.k_omega * err.omega_e
        + j * reference.omega_d_rate
        + state.omega.cross(j * state.omega)
}

pub fn torque_continuous(
    err: &AttitudeError,
    state: &BodyState,
    reference: &ReferenceSample,
    gains: &ControllerGains,
    inertia: &InertiaModel,
) -> Vec3 {
    signed_torque(1.0, err, state, reference, gains, inertia)
}

/// Sign-of-scalar law: the proportional term points along the shorter path.
pub fn torque_benchmark(
    err: &AttitudeError,
    state: &BodyState,
    reference: &ReferenceSample,
    gains: &ControllerGains,
    inertia: &InertiaModel,
) -> Vec3 {
    signed_torque(
        Sigma::sign_of(err.m_e).value(),
        err,
        state,
        reference,
        gains,
        inertia,
    )
}

pub fn torque_sigma(
    sigma: Sigma,
    err: &AttitudeError,
    state: &BodyState,
    reference: &ReferenceSample,
    gains: &ControllerGains,
    inertia: &InertiaModel,
) -> Vec3 {
    signed_torque(sigma.value(), err, state, reference, gains, inertia)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::AxisAngle;
    use core::f64::consts::PI;

    fn yaw(angle: f64) -> UnitQuaternion {
        UnitQuaternion::from_axis_angle(&AxisAngle::new(Vec3::Z, angle).unwrap())
    }

    fn error_about_z(m_e: f64, s: f64) -> AttitudeError {
        AttitudeError {
            m_e,
            n_e: Vec3::new(0.0, 0.0, s),
            omega_e: Vec3::ZERO,
        }
    }

    #[test]
    fn sigma_conversions() {
        assert_eq!(Sigma::try_from(1.0), Ok(Sigma::Positive));
        assert_eq!(Sigma::try_from(-1i64), Ok(Sigma::Negative));
        assert_eq!(Sigma::try_from(0.0), Err(Error::InvalidSigma(0.0)));
        assert_eq!(Sigma::try_from(0.5), Err(Error::InvalidSigma(0.5)));
        assert_eq!(Sigma::sign_of(0.0), Sigma::Positive);
        assert_eq!(Sigma::sign_of(-0.0), Sigma::Positive);
    }

    #[test]
    fn attitude_error_examples() {
        let r = ReferenceSample::new(
            yaw(0.7),
            Quaternion::ZERO,
            Vec3::new(0.1, 0.2, 0.3),
            Vec3::ZERO,
        )
        .unwrap();
        let e = attitude_error(&yaw(0.7), &r, Vec3::new(0.1, 0.2, 0.3));
        assert!((e.m_e - 1.0).abs() < 1e-15);
        assert!(e.n_e.norm() < 1e-15);
        assert_eq!(e.omega_e, Vec3::ZERO);

        let e = attitude_error(
            &UnitQuaternion::IDENTITY,
            &ReferenceSample::hold(yaw(PI)),
            Vec3::ZERO,
        );
        assert!(e.m_e.abs() < 1e-15);
        assert!((e.n_e - Vec3::Z).norm() < 1e-15);

        let e = attitude_error(
            &yaw(PI),
            &ReferenceSample::hold(UnitQuaternion::IDENTITY),
            Vec3::ZERO,
        );
        assert!(e.m_e.abs() < 1e-15);
        assert!((e.n_e + Vec3::Z).norm() < 1e-15);
    }

    #[test]
    fn desired_body_rate_examples() {
        let q = yaw(0.3);
        assert_eq!(
            desired_body_rate(&q, &yaw(1.0), Quaternion::ZERO).unwrap(),
            Vec3::ZERO
        );

        let w = desired_body_rate(
            &UnitQuaternion::IDENTITY,
            &UnitQuaternion::IDENTITY,
            Quaternion::pure(Vec3::Z),
        )
        .unwrap();
        assert!((w - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-15);

        // aligned frames, spin about b3 at 2 rad/s
        let q_d = yaw(1.2);
        let rate = (q_d.as_quaternion() * Quaternion::pure(Vec3::new(0.0, 0.0, 2.0))) * 0.5;
        let w = desired_body_rate(&q_d, &q_d, rate).unwrap();
        assert!((w - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-14);

        let bad = Quaternion::new(1.0, Vec3::ZERO);
        assert!(matches!(
            desired_body_rate(&q, &UnitQuaternion::IDENTITY, bad),
            Err(Error::NonTangentRate { .. })
        ));
    }

    #[test]
    fn reference_rejects_non_tangent_rate() {
        let r = ReferenceSample::new(
            UnitQuaternion::IDENTITY,
            Quaternion::new(0.1, Vec3::ZERO),
            Vec3::ZERO,
            Vec3::ZERO,
        );
        assert!(matches!(r, Err(Error::NonTangentRate { .. })));
    }

    #[test]
    fn frame_transfer_maps_desired_rate_into_body() {
        // body yawed by π/2 relative to the desired frame, which spins about n1
        let q = yaw(PI / 2.0);
        let q_d = UnitQuaternion::IDENTITY;
        let rate = Quaternion::pure(Vec3::new(0.5, 0.0, 0.0));
        let w = desired_body_rate(&q, &q_d, rate).unwrap();
        // (1,0,0) in N is (0,-1,0) in a body yawed by +π/2
        assert!((w - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn continuous_torque_examples() {
        let j = InertiaModel::crazyflie();
        let gains = ControllerGains::flight_test(&j);
        let rest = BodyState::default();
        let r = ReferenceSample::hold(UnitQuaternion::IDENTITY);
        let zero = AttitudeError {
            m_e: 1.0,
            n_e: Vec3::ZERO,
            omega_e: Vec3::ZERO,
        };
        assert_eq!(torque_continuous(&zero, &rest, &r, &gains, &j), Vec3::ZERO);

        let s = 0.4;
        let tau = torque_continuous(&error_about_z(0.9, s), &rest, &r, &gains, &j);
        assert!((tau - Vec3::new(0.0, 0.0, 900.0 * 2.93e-5 * s)).norm() < 1e-18);
    }

    #[test]
    fn continuous_torque_is_sum_of_terms() {
        let j = InertiaModel::new(Mat3::from_rows([
            [1.7e-5, 1e-7, 0.0],
            [1e-7, 1.6e-5, 2e-7],
            [0.0, 2e-7, 2.9e-5],
        ]))
        .unwrap();
        let gains = ControllerGains::inertia_multiples(&j, 900.0, 90.0).unwrap();
        let state = BodyState::new(yaw(0.4), Vec3::new(1.0, -2.0, 3.0));
        let r = ReferenceSample::new(
            yaw(1.1),
            Quaternion::ZERO,
            Vec3::new(0.5, 0.1, -0.2),
            Vec3::new(2.0, -1.0, 0.5),
        )
        .unwrap();
        let err = attitude_error(&state.q, &r, state.omega);
        let tau = torque_continuous(&err, &state, &r, &gains, &j);
        let terms = gains.k_n() * err.n_e
            + gains.k_omega() * err.omega_e
            + j.matrix() * r.omega_d_rate
            + state.omega.cross(j.matrix() * state.omega);
        assert!((tau - terms).max_abs() <= 1e-15);
    }

    #[test]
    fn benchmark_torque_examples() {
        let j = InertiaModel::crazyflie();
        let gains = ControllerGains::flight_test(&j);
        let rest = BodyState::default();
        let r = ReferenceSample::hold(UnitQuaternion::IDENTITY);

        let pos = error_about_z(0.9, 0.3);
        assert_eq!(
            torque_benchmark(&pos, &rest, &r, &gains, &j),
            torque_continuous(&pos, &rest, &r, &gains, &j)
        );
        let neg = error_about_z(-0.9, 0.3);
        assert_eq!(
            torque_benchmark(&neg, &rest, &r, &gains, &j),
            -torque_continuous(&neg, &rest, &r, &gains, &j)
        );
        let zero = error_about_z(0.0, 1.0);
        assert_eq!(
            torque_benchmark(&zero, &rest, &r, &gains, &j),
            torque_continuous(&zero, &rest, &r, &gains, &j)
        );
    }

    #[test]
    fn sigma_torque_examples() {
        let j = InertiaModel::crazyflie();
        let gains = ControllerGains::flight_test(&j);
        let state = BodyState::new(yaw(0.2), Vec3::new(0.0, 0.3, 1.0));
        let r = ReferenceSample::hold(yaw(2.5));
        let err = attitude_error(&state.q, &r, state.omega);
        assert_eq!(
            torque_sigma(Sigma::Positive, &err, &state, &r, &gains, &j),
            torque_continuous(&err, &state, &r, &gains, &j)
        );

        let still = BodyState::default();
        let hold = ReferenceSample::hold(UnitQuaternion::IDENTITY);
        let zero = AttitudeError {
            m_e: 1.0,
            n_e: Vec3::ZERO,
            omega_e: Vec3::ZERO,
        };
        assert_eq!(
            torque_sigma(Sigma::Negative, &zero, &still, &hold, &gains, &j),
            torque_continuous(&zero, &still, &hold, &gains, &j)
        );

        let s = -0.25;
        let tau = torque_sigma(
            Sigma::Negative,
            &error_about_z(0.5, s),
            &still,
            &hold,
            &gains,
            &j,
        );
        assert!((tau - Vec3::new(0.0, 0.0, -900.0 * 2.93e-5 * s)).norm() < 1e-18);
    }

    #[test]
    fn benchmark_pushes_along_shorter_path() {
        let j = InertiaModel::crazyflie();
        let gains = ControllerGains::flight_test(&j);
        let u = Vec3::new(1.0, 2.0, -0.5) * (1.0 / Vec3::new(1.0, 2.0, -0.5).norm());
        for theta in [0.3, 1.5, 3.0, 3.3, 4.5, 6.0] {
            // q_d = q ⊗ rot(u, θ) so that the error axis is u with angle θ
            let q = UnitQuaternion::IDENTITY;
            let q_d = q * UnitQuaternion::from_axis_angle(&AxisAngle::new(u, theta).unwrap());
            let r = ReferenceSample::hold(q_d);
            let state = BodyState::at_rest(q);
            let err = attitude_error(&q, &r, Vec3::ZERO);
            let tau = torque_benchmark(&err, &state, &r, &gains, &j);
            let along = tau.dot(u);
            if theta < PI {
                assert!(along > 0.0, "theta {theta}");
            } else {
                assert!(along < 0.0, "theta {theta}");
            }
        }
    }
}
