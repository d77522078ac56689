//! Three-stage yaw maneuvers flown in closed loop, and their scoring.
//!
//! Stage 1 hovers at the identity attitude. Stage 2 spins the reference at a
//! constant rate `ω₀`. Stage 3 starts at the first control step where the
//! reference ramp has covered `ψ₀` and steps the reference back to yaw 0,
//! which produces the large attitude error the controllers are compared on.
//! Scoring covers exactly `n_samples_stage3` control steps from stage 3 entry.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::control::{
    attitude_error, torque_benchmark, torque_continuous, ControllerGains, ReferenceSample, Sigma,
};
use crate::dynamics::{integrate_step, BodyState, InertiaModel, MAX_TIMESTEP};
use crate::linalg::Vec3;
use crate::mps::{mps_torque, PfmWeights, SelectorConfig, SelectorState};
use crate::quaternion::{AxisAngle, Quaternion, UnitQuaternion};
use crate::{Error, Result};

/// Upper bound on the number of control steps in one run.
pub const MAX_RUN_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManeuverSpec {
    omega0: Vec3,
    psi0: f64,
    stage1_duration: f64,
    control_dt: f64,
    n_samples_stage3: usize,
}

impl ManeuverSpec {
    pub fn new(
        omega0: Vec3,
        psi0: f64,
        stage1_duration: f64,
        control_dt: f64,
        n_samples_stage3: usize,
    ) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::InvalidConfig("omega0 must be finite"));
        }
        if !(psi0 > 0.0 && psi0 < TAU) {
            return Err(Error::InvalidConfig("psi0 must be in (0, 2π)"));
        }
        if !(stage1_duration.is_finite() && stage1_duration >= 0.0) {
            return Err(Error::InvalidConfig("stage1_duration must be >= 0"));
        }
        if !(control_dt > 0.0 && control_dt <= MAX_TIMESTEP) {
            return Err(Error::InvalidConfig("control_dt must be in (0, 0.01] s"));
        }
        if n_samples_stage3 < 1 {
            return Err(Error::InvalidConfig("n_samples_stage3 must be >= 1"));
        }
        Ok(Self {
            omega0,
            psi0,
            stage1_duration,
            control_dt,
            n_samples_stage3,
        })
    }

    /// Yaw spin `ω₀·b₃` with the flight-test timing: 500 Hz and 1500 scored samples.
    pub fn yaw(omega0: f64, psi0: f64) -> Result<Self> {
        Self::new(Vec3::new(0.0, 0.0, omega0), psi0, 0.5, 0.002, 1500)
    }

    pub fn omega0(&self) -> Vec3 {
        self.omega0
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    pub fn stage1_duration(&self) -> f64 {
        self.stage1_duration
    }

    pub fn control_dt(&self) -> f64 {
        self.control_dt
    }

    pub fn n_samples_stage3(&self) -> usize {
        self.n_samples_stage3
    }

    fn ramp(&self, t: f64) -> f64 {
        self.omega0.norm() * (t - self.stage1_duration)
    }

    /// First control step index whose reference ramp has reached `ψ₀`.
    pub fn stage3_entry_step(&self) -> Option<usize> {
        let rate = self.omega0.norm();
        if rate == 0.0 {
            return None;
        }
        let dt = self.control_dt;
        let estimate = libm::ceil((self.stage1_duration + self.psi0 / rate) / dt);
        if !(estimate < MAX_RUN_STEPS as f64) {
            return None;
        }
        let reached = |k: usize| {
            let t = k as f64 * dt;
            t >= self.stage1_duration && self.ramp(t) >= self.psi0
        };
        let mut k = estimate as usize;
        while k > 0 && reached(k - 1) {
            k -= 1;
        }
        while !reached(k) {
            k += 1;
        }
        Some(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Hover,
    Spin,
    Hold,
}

/// Reference at one instant, before it is expressed in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagedReference {
    pub stage: Stage,
    /// Reference yaw for reporting, `(-π, π]`.
    pub psi_d: f64,
    pub q_d: UnitQuaternion,
    pub q_d_rate: Quaternion,
    /// `ω̂̇_d` in the desired frame; zero for all three stages.
    pub omega_hat_d_rate: Vec3,
}

impl StagedReference {
    fn resting(stage: Stage) -> Self {
        Self {
            stage,
            psi_d: 0.0,
            q_d: UnitQuaternion::IDENTITY,
            q_d_rate: Quaternion::ZERO,
            omega_hat_d_rate: Vec3::ZERO,
        }
    }

    /// The sample seen from body attitude `q`.
    pub fn sample(&self, q: &UnitQuaternion) -> Result<ReferenceSample> {
        ReferenceSample::from_desired(q, self.q_d, self.q_d_rate, self.omega_hat_d_rate)
    }
}

/// Reference at time `t` (s). Stage transitions are latched: once the stage 3
/// entry step has passed the reference stays at yaw 0.
pub fn reference_at(spec: &ManeuverSpec, t: f64) -> StagedReference {
    let entered_hold = spec
        .stage3_entry_step()
        .is_some_and(|k| t >= k as f64 * spec.control_dt);
    if entered_hold {
        return StagedReference::resting(Stage::Hold);
    }
    if t < spec.stage1_duration {
        return StagedReference::resting(Stage::Hover);
    }
    let rate = spec.omega0.norm();
    if rate == 0.0 {
        return StagedReference::resting(Stage::Spin);
    }
    let axis = spec.omega0 * (1.0 / rate);
    let angle = libm::fmod(spec.ramp(t), TAU);
    let q_d = UnitQuaternion::from_axis_angle(
        &AxisAngle::new(axis, angle).expect("normalized axis and finite angle"),
    );
    let q_d_rate = (q_d.as_quaternion() * Quaternion::pure(spec.omega0)) * 0.5;
    StagedReference {
        stage: Stage::Spin,
        psi_d: q_d.yaw().unwrap_or(0.0),
        q_d,
        q_d_rate,
        omega_hat_d_rate: Vec3::ZERO,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Continuous,
    Benchmark,
    Mps,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [
        ControllerKind::Continuous,
        ControllerKind::Benchmark,
        ControllerKind::Mps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Continuous => "continuous",
            ControllerKind::Benchmark => "benchmark",
            ControllerKind::Mps => "mps",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Seeded initial-condition perturbation: each rotation-vector component is
/// drawn uniformly from `±attitude` (rad) and each body-rate component from
/// `±rate` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jitter {
    pub attitude: f64,
    pub rate: f64,
}

impl Jitter {
    pub fn is_zero(&self) -> bool {
        self.attitude == 0.0 && self.rate == 0.0
    }

    pub fn initial_state(&self, seed: u64) -> BodyState {
        if self.is_zero() {
            return BodyState::default();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut symmetric = |half_width: f64| {
            let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            half_width * (2.0 * unit - 1.0)
        };
        let r = Vec3::new(
            symmetric(self.attitude),
            symmetric(self.attitude),
            symmetric(self.attitude),
        );
        let w = Vec3::new(
            symmetric(self.rate),
            symmetric(self.rate),
            symmetric(self.rate),
        );
        BodyState::new(UnitQuaternion::from_rotation_vector(r), w)
    }
}

/// Everything a closed-loop run needs besides the maneuver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedLoopConfig {
    pub inertia: InertiaModel,
    pub gains: ControllerGains,
    pub weights: PfmWeights,
    pub selector: SelectorConfig,
    /// Optional symmetric per-axis clamp on the applied torque (N·m).
    pub torque_limit: Option<Vec3>,
    /// `|ω|` (rad/s) beyond which a run is declared diverged.
    pub divergence_bound: f64,
    pub jitter: Jitter,
}

impl ClosedLoopConfig {
    /// Crazyflie-class inertia with the flight-test gains, weights and selector.
    pub fn flight_test() -> Self {
        let inertia = InertiaModel::crazyflie();
        Self {
            inertia,
            gains: ControllerGains::flight_test(&inertia),
            weights: PfmWeights::flight_test(),
            selector: SelectorConfig::flight_test(),
            torque_limit: None,
            divergence_bound: 200.0,
            jitter: Jitter::default(),
        }
    }
}

/// One control step: the state sampled before the step and the torque
/// applied over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSample {
    pub t: f64,
    pub stage: Stage,
    pub psi_d: f64,
    pub psi: f64,
    pub q: UnitQuaternion,
    pub omega: Vec3,
    pub tau: Vec3,
    pub sigma: Sigma,
    pub delta_gamma: f64,
    pub m_e: f64,
    pub n_e: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub controller: ControllerKind,
    pub samples: Vec<RunSample>,
    /// Index of the first stage 3 sample.
    pub stage3_start: usize,
    pub gamma_exp: f64,
    /// Number of sign changes of σ over the whole run.
    pub switch_count: usize,
}

impl RunRecord {
    /// The samples that enter `Γ_exp`.
    pub fn scored(&self) -> &[RunSample] {
        &self.samples[self.stage3_start..]
    }

    /// Sign of `m_e` at the end of the run: which equilibrium was reached.
    pub fn settled_equilibrium(&self) -> Sigma {
        Sigma::sign_of(self.samples.last().map_or(1.0, |s| s.m_e))
    }

    /// σ at stage 3 entry.
    pub fn sigma_at_entry(&self) -> Sigma {
        self.samples[self.stage3_start].sigma
    }

    /// Smallest and largest yaw rate `ω_z` seen during stage 3.
    pub fn stage3_yaw_rate_range(&self) -> (f64, f64) {
        self.scored()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.omega.z), hi.max(s.omega.z))
            })
    }
}

/// `Σ (τᵀRτ + n_eᵀQn_e)·T_s` over paired torque and error-vector series.
pub fn gamma_exp(torques: &[Vec3], errors: &[Vec3], weights: &PfmWeights, ts: f64) -> Result<f64> {
    if torques.len() != errors.len() {
        return Err(Error::LengthMismatch {
            left: torques.len(),
            right: errors.len(),
        });
    }
    Ok(torques.iter().zip(errors).fold(0.0, |acc, (&tau, &n_e)| {
        acc + weights.stage_cost(tau, n_e) * ts
    }))
}

/// Sample mean and empirical standard deviation (divisor `n − 1`; zero for `n = 1`).
pub fn mean_and_esd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some((mean, libm::sqrt(ss / (n - 1.0))))
}

/// Flies `spec` in closed loop under `kind` at the control rate.
pub fn run_maneuver(
    spec: &ManeuverSpec,
    kind: ControllerKind,
    cfg: &ClosedLoopConfig,
    seed: u64,
) -> Result<RunRecord> {
    let entry = spec.stage3_entry_step().ok_or(Error::StageNeverEntered)?;
    let total = entry + spec.n_samples_stage3;
    if total > MAX_RUN_STEPS {
        return Err(Error::InvalidConfig(
            "maneuver exceeds the maximum run length",
        ));
    }
    let dt = spec.control_dt;
    let mut state = cfg.jitter.initial_state(seed);
    let mut selector = SelectorState::new(cfg.selector.sigma_init());
    let mut samples = Vec::with_capacity(total);
    let mut switch_count = 0;

    for k in 0..total {
        let t = k as f64 * dt;
        let staged = reference_at(spec, t);
        let reference = staged.sample(&state.q)?;
        let err = attitude_error(&state.q, &reference, state.omega);
        let (tau, sigma, delta_gamma) = match kind {
            ControllerKind::Continuous => (
                torque_continuous(&err, &state, &reference, &cfg.gains, &cfg.inertia),
                Sigma::Positive,
                0.0,
            ),
            ControllerKind::Benchmark => (
                torque_benchmark(&err, &state, &reference, &cfg.gains, &cfg.inertia),
                Sigma::sign_of(err.m_e),
                0.0,
            ),
            ControllerKind::Mps => {
                let (tau, next) = mps_torque(
                    &state,
                    &reference,
                    selector,
                    &cfg.gains,
                    &cfg.inertia,
                    &cfg.weights,
                    &cfg.selector,
                )?;
                selector = next;
                (tau, next.sigma, next.last_delta_gamma)
            }
        };
        let tau = match cfg.torque_limit {
            Some(limit) => tau.clamp_symmetric(limit),
            None => tau,
        };
        if let Some(prev) = samples.last().map(|s: &RunSample| s.sigma) {
            if prev != sigma {
                switch_count += 1;
            }
        }
        samples.push(RunSample {
            t,
            stage: staged.stage,
            psi_d: staged.psi_d,
            psi: state.q.yaw().unwrap_or(0.0),
            q: state.q,
            omega: state.omega,
            tau,
            sigma,
            delta_gamma,
            m_e: err.m_e,
            n_e: err.n_e,
        });

        state = integrate_step(&state, tau, &cfg.inertia, dt)?;
        let omega_norm = state.omega.norm();
        if !(omega_norm <= cfg.divergence_bound) {
            return Err(Error::DivergedState {
                time: t + dt,
                omega_norm,
            });
        }
    }

    let scored = &samples[entry..];
    let torques: Vec<Vec3> = scored.iter().map(|s| s.tau).collect();
    let errors: Vec<Vec3> = scored.iter().map(|s| s.n_e).collect();
    let gamma = gamma_exp(&torques, &errors, &cfg.weights, dt)?;

    Ok(RunRecord {
        controller: kind,
        samples,
        stage3_start: entry,
        gamma_exp: gamma,
        switch_count,
    })
}
