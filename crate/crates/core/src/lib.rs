//! Rigid-body attitude control with model-predictive selection (MPS) of the
//! stable closed-loop equilibrium attitude-error quaternion.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. It contains:
//!
//! - [`quaternion`]: unit-quaternion algebra, scalar-first.
//! - [`dynamics`]: the open-loop rotational plant and a fixed-step RK4 integrator.
//! - [`control`]: attitude error, desired body rate and the three torque laws
//!   (continuous, sign-of-scalar benchmark, sigma-parameterized).
//! - [`mps`]: finite-horizon rollout cost, hysteresis switching and the MPS torque.
//! - [`maneuver`]: three-stage yaw references, closed-loop runs and scoring.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x <= bound)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod control;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod maneuver;
pub mod mps;
pub mod quaternion;

pub use control::{
    attitude_error, desired_body_rate, torque_benchmark, torque_continuous, torque_sigma,
    AttitudeError, ControllerGains, ReferenceSample, Sigma,
};
pub use dynamics::{
    angular_acceleration, integrate_step, state_derivative, BodyState, InertiaModel,
};
pub use error::Error;
pub use linalg::{Mat3, Vec3};
pub use maneuver::{
    gamma_exp, reference_at, run_maneuver, ClosedLoopConfig, ControllerKind, Jitter, ManeuverSpec,
    RunRecord, Stage,
};
pub use mps::{mps_torque, rollout_cost, select_sigma, PfmWeights, SelectorConfig, SelectorState};
pub use quaternion::{AxisAngle, Quaternion, UnitQuaternion};

pub type Result<T, E = Error> = core::result::Result<T, E>;
