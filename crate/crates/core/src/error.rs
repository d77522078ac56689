use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// A quaternion expected to be unit length was off by more than the tolerance.
    NonUnitInput {
        norm: f64,
    },
    NonUnitAxis {
        norm: f64,
    },
    /// The body x-axis is (nearly) vertical, so heading is undefined.
    GimbalDegenerate,
    InvalidTimestep {
        dt: f64,
    },
    NonFinite(&'static str),
    /// `2 q_d^-1 ⊗ q̇_d` has a scalar part, i.e. the rate is not tangent to q_d.
    NonTangentRate {
        scalar: f64,
    },
    InvalidSigma(f64),
    NonFiniteCost,
    NotPositiveDefinite(&'static str),
    InvalidConfig(&'static str),
    LengthMismatch {
        left: usize,
        right: usize,
    },
    DivergedState {
        time: f64,
        omega_norm: f64,
    },
    StageNeverEntered,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonUnitInput { norm } => write!(f, "quaternion is not unit (norm {norm})"),
            Error::NonUnitAxis { norm } => write!(f, "rotation axis is not unit (norm {norm})"),
            Error::GimbalDegenerate => write!(f, "body x-axis is vertical; yaw undefined"),
            Error::InvalidTimestep { dt } => {
                write!(f, "invalid time step {dt} s (need 0 < dt <= 0.01)")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::NonTangentRate { scalar } => {
                write!(
                    f,
                    "quaternion rate is not tangent to the reference (scalar part {scalar})"
                )
            }
            Error::InvalidSigma(s) => write!(f, "sigma must be -1 or +1, got {s}"),
            Error::NonFiniteCost => write!(f, "non-finite rollout cost"),
            Error::NotPositiveDefinite(what) => {
                write!(f, "{what} is not symmetric positive definite")
            }
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::LengthMismatch { left, right } => {
                write!(f, "series length mismatch ({left} vs {right})")
            }
            Error::DivergedState { time, omega_norm } => {
                write!(
                    f,
                    "state diverged at t = {time} s (|omega| = {omega_norm} rad/s)"
                )
            }
            Error::StageNeverEntered => write!(f, "stage 3 is never entered for this maneuver"),
        }
    }
}

impl core::error::Error for Error {}
