//! Scalar-first quaternions.
//!
//! [`Quaternion`] is a raw 4-vector, used for rates and intermediate
//! integrator stages. [`UnitQuaternion`] carries attitudes and is kept unit
//! length by every operation that returns one. `q` and `-q` describe the
//! same rotation and no operation here flips the sign on its own.

use core::f64::consts::{PI, TAU};
use core::ops::{Add, Mul, Neg};

use crate::linalg::{Mat3, Vec3};
use crate::{Error, Result};

/// Tolerance on `| |q| - 1 |` accepted when constructing a unit quaternion.
pub const UNIT_TOLERANCE: f64 = 1e-6;
const AXIS_TOLERANCE: f64 = 1e-9;
const SMALL_VECTOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub v: Vec3,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, Vec3::ZERO);

    #[inline]
    pub const fn new(w: f64, v: Vec3) -> Self {
        Self { w, v }
    }

    /// Pure quaternion `(0, v)`.
    #[inline]
    pub const fn pure(v: Vec3) -> Self {
        Self::new(0.0, v)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], Vec3::new(a[1], a[2], a[3]))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.v.x, self.v.y, self.v.z]
    }

    #[inline]
    pub fn dot(self, rhs: Quaternion) -> f64 {
        self.w * rhs.w + self.v.dot(rhs.v)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    #[inline]
    pub fn conjugate(self) -> Quaternion {
        Quaternion::new(self.w, -self.v)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.v.is_finite()
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    /// Hamilton product.
    #[inline]
    fn mul(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * rhs.w - self.v.dot(rhs.v),
            rhs.v * self.w + self.v * rhs.w + self.v.cross(rhs.v),
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.v * s)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w + rhs.w, self.v + rhs.v)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.v)
    }
}

/// Rotation axis and angle. The angle lies in `[0, 2π]`; `2π` only occurs
/// for the negated identity `(-1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    axis: Vec3,
    angle: f64,
}

impl AxisAngle {
    pub fn new(axis: Vec3, angle: f64) -> Result<Self> {
        let norm = axis.norm();
        if !((norm - 1.0).abs() <= AXIS_TOLERANCE) {
            return Err(Error::NonUnitAxis { norm });
        }
        if !angle.is_finite() {
            return Err(Error::NonFinite("rotation angle"));
        }
        Ok(Self { axis, angle })
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quaternion);

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::new(1.0, Vec3::ZERO));

    /// Builds a unit quaternion from components that must already be unit
    /// length within [`UNIT_TOLERANCE`]; the result is renormalized.
    pub fn try_new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_quaternion(Quaternion::new(w, Vec3::new(x, y, z)))
    }

    pub fn from_quaternion(q: Quaternion) -> Result<Self> {
        let norm = q.norm();
        if !q.is_finite() || !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
            return Err(Error::NonUnitInput { norm });
        }
        Ok(Self(q * (1.0 / norm)))
    }

    /// Normalizes any finite, non-zero quaternion.
    pub fn normalize(q: Quaternion) -> Result<Self> {
        let norm = q.norm();
        if !q.is_finite() || norm == 0.0 {
            return Err(Error::NonUnitInput { norm });
        }
        Ok(Self(q * (1.0 / norm)))
    }

    #[inline]
    pub fn w(&self) -> f64 {
        self.0.w
    }

    #[inline]
    pub fn v(&self) -> Vec3 {
        self.0.v
    }

    #[inline]
    pub fn as_quaternion(&self) -> Quaternion {
        self.0
    }

    pub fn to_array(&self) -> [f64; 4] {
        self.0.to_array()
    }

    /// `self ⊗ rhs`, renormalized. The right operand is expressed in the
    /// frame of the left one, so `rotation_matrix(a ⊗ b) = R(a)·R(b)`.
    #[inline]
    pub fn hamilton_product(&self, rhs: &UnitQuaternion) -> UnitQuaternion {
        let p = self.0 * rhs.0;
        UnitQuaternion(p * (1.0 / p.norm()))
    }

    #[inline]
    pub fn inverse(&self) -> UnitQuaternion {
        UnitQuaternion(self.0.conjugate())
    }

    pub fn from_axis_angle(aa: &AxisAngle) -> UnitQuaternion {
        let (s, c) = libm::sincos(0.5 * aa.angle);
        let q = Quaternion::new(c, aa.axis * s);
        UnitQuaternion(q * (1.0 / q.norm()))
    }

    /// Exponential map of a rotation vector (axis times angle).
    pub fn from_rotation_vector(r: Vec3) -> UnitQuaternion {
        let angle = r.norm();
        if angle < SMALL_VECTOR {
            return UnitQuaternion::IDENTITY;
        }
        let (s, c) = libm::sincos(0.5 * angle);
        let q = Quaternion::new(c, r * (s / angle));
        UnitQuaternion(q * (1.0 / q.norm()))
    }

    /// Inverse of [`from_axis_angle`](Self::from_axis_angle) with
    /// `θ = 2·atan2(|v|, w)`. A vanishing vector part yields the axis `(0,0,1)`.
    pub fn to_axis_angle(&self) -> AxisAngle {
        let vn = self.0.v.norm();
        let angle = 2.0 * libm::atan2(vn, self.0.w);
        let axis = if vn < SMALL_VECTOR {
            Vec3::Z
        } else {
            self.0.v * (1.0 / vn)
        };
        AxisAngle { axis, angle }
    }

    /// Maps body-frame vectors to the inertial frame.
    pub fn rotation_matrix(&self) -> Mat3 {
        let Quaternion { w, v } = self.0;
        let (x, y, z) = (v.x, v.y, v.z);
        Mat3::from_rows([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ])
    }

    /// Heading of the body x-axis in the inertial horizontal plane, in `(-π, π]`.
    pub fn yaw(&self) -> Result<f64> {
        let x_axis = self.rotation_matrix().column(0);
        let horizontal = libm::hypot(x_axis.x, x_axis.y);
        // |sin(1e-6 rad)| from vertical
        if horizontal < 1e-6 {
            return Err(Error::GimbalDegenerate);
        }
        let yaw = libm::atan2(x_axis.y, x_axis.x);
        Ok(if yaw <= -PI { PI } else { yaw })
    }

    /// Rotation angle in `[0, π]` of the physical rotation (sign-invariant).
    pub fn geodesic_angle(&self) -> f64 {
        let a = self.to_axis_angle().angle;
        if a > PI {
            TAU - a
        } else {
            a
        }
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    #[inline]
    fn mul(self, rhs: UnitQuaternion) -> UnitQuaternion {
        self.hamilton_product(&rhs)
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;
    #[inline]
    fn neg(self) -> UnitQuaternion {
        UnitQuaternion(-self.0)
    }
}
