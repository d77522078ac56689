//! Model-predictive selection of the stable closed-loop equilibrium.
//!
//! At every control step the closed loop is simulated over a finite horizon
//! twice, once with `σ = +1` and once with `σ = −1`, each accumulating the
//! quadratic figure of merit
//!
//! ```text
//! Γ = ∫ (τ_σᵀ R τ_σ + n_eᵀ Q n_e) dt      over [t, t + t_h]
//! ```
//!
//! With `ΔΓ = Γ(+1) − Γ(−1)` the sign is then updated with a dead band of
//! half-width `δ`: hold inside `(−δ, δ)`, pick `−1` when `ΔΓ ≥ δ` and `+1`
//! when `ΔΓ ≤ −δ`.

use crate::control::{attitude_error, torque_sigma, ControllerGains, ReferenceSample, Sigma};
use crate::dynamics::{integrate_step, BodyState, InertiaModel, MAX_TIMESTEP};
use crate::linalg::{Mat3, Vec3};
use crate::{Error, Result};

/// `R` weighs torque, `Q` weighs the error vector part. Both SPD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfmWeights {
    r: Mat3,
    q: Mat3,
}

impl PfmWeights {
    pub fn new(r: Mat3, q: Mat3) -> Result<Self> {
        if !r.is_symmetric_positive_definite() {
            return Err(Error::NotPositiveDefinite("R"));
        }
        if !q.is_symmetric_positive_definite() {
            return Err(Error::NotPositiveDefinite("Q"));
        }
        Ok(Self { r, q })
    }

    /// `R = I`, `Q = 1e-6·I`.
    pub fn flight_test() -> Self {
        Self {
            r: Mat3::IDENTITY,
            q: Mat3::IDENTITY.scaled(1e-6),
        }
    }

    pub fn r(&self) -> Mat3 {
        self.r
    }

    pub fn q(&self) -> Mat3 {
        self.q
    }

    /// Integrand `τᵀRτ + n_eᵀQn_e`.
    #[inline]
    pub fn stage_cost(&self, tau: Vec3, n_e: Vec3) -> f64 {
        self.r.quadratic_form(tau) + self.q.quadratic_form(n_e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorConfig {
    horizon: f64,
    prediction_dt: f64,
    delta: f64,
    sigma_init: Sigma,
}

impl SelectorConfig {
    pub fn new(horizon: f64, prediction_dt: f64, delta: f64, sigma_init: Sigma) -> Result<Self> {
        if !(prediction_dt > 0.0 && prediction_dt <= MAX_TIMESTEP) {
            return Err(Error::InvalidConfig("prediction_dt must be in (0, 0.01] s"));
        }
        if !(horizon.is_finite() && horizon >= prediction_dt) {
            return Err(Error::InvalidConfig("horizon must be >= prediction_dt"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidConfig("delta must be > 0"));
        }
        let cfg = Self {
            horizon,
            prediction_dt,
            delta,
            sigma_init,
        };
        if cfg.horizon_steps() < 1 {
            return Err(Error::InvalidConfig(
                "horizon is shorter than one prediction step",
            ));
        }
        Ok(cfg)
    }

    /// `t_h = 0.4 s`, `dt = 0.002 s`, `δ = 5e-7`, `σ₀ = +1`.
    pub fn flight_test() -> Self {
        Self::new(0.4, 0.002, 5e-7, Sigma::Positive).expect("constant config is valid")
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn prediction_dt(&self) -> f64 {
        self.prediction_dt
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma_init(&self) -> Sigma {
        self.sigma_init
    }

    /// Discrete horizon `round(t_h / dt)`.
    pub fn horizon_steps(&self) -> usize {
        libm::round(self.horizon / self.prediction_dt) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorState {
    pub sigma: Sigma,
    /// Most recent `Γ(+1) − Γ(−1)`, N²·m²·s.
    pub last_delta_gamma: f64,
}

impl SelectorState {
    pub fn new(sigma: Sigma) -> Self {
        Self {
            sigma,
            last_delta_gamma: 0.0,
        }
    }
}

/// Predicted cost of holding `sigma` for the whole horizon, starting from
/// `state`, with the reference held constant. Left-endpoint Riemann sum.
pub fn rollout_cost(
    sigma: Sigma,
    state: &BodyState,
    reference: &ReferenceSample,
    gains: &ControllerGains,
    inertia: &InertiaModel,
    weights: &PfmWeights,
    cfg: &SelectorConfig,
) -> Result<f64> {
    let dt = cfg.prediction_dt;
    let mut predicted = *state;
    let mut cost = 0.0;
    for _ in 0..cfg.horizon_steps() {
        let err = attitude_error(&predicted.q, reference, predicted.omega);
        let tau = torque_sigma(sigma, &err, &predicted, reference, gains, inertia);
        cost += weights.stage_cost(tau, err.n_e) * dt;
        predicted =
            integrate_step(&predicted, tau, inertia, dt).map_err(|_| Error::NonFiniteCost)?;
    }
    if !cost.is_finite() {
        return Err(Error::NonFiniteCost);
    }
    Ok(cost)
}

/// Hysteresis switching on `ΔΓ = gamma_star − gamma_dagger`.
pub fn select_sigma(
    state: SelectorState,
    gamma_star: f64,
    gamma_dagger: f64,
    delta: f64,
) -> Result<SelectorState> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidConfig("delta must be > 0"));
    }
    if !gamma_star.is_finite() || !gamma_dagger.is_finite() {
        return Err(Error::NonFiniteCost);
    }
    let delta_gamma = gamma_star - gamma_dagger;
    let sigma = if delta_gamma >= delta {
        Sigma::Negative
    } else if delta_gamma <= -delta {
        Sigma::Positive
    } else {
        state.sigma
    };
    Ok(SelectorState {
        sigma,
        last_delta_gamma: delta_gamma,
    })
}

/// One MPS control step: both rollouts, the switching rule, then `τ_σ` with
/// the updated sign.
pub fn mps_torque(
    state: &BodyState,
    reference: &ReferenceSample,
    selector: SelectorState,
    gains: &ControllerGains,
    inertia: &InertiaModel,
    weights: &PfmWeights,
    cfg: &SelectorConfig,
) -> Result<(Vec3, SelectorState)> {
    let gamma_star = rollout_cost(
        Sigma::Positive,
        state,
        reference,
        gains,
        inertia,
        weights,
        cfg,
    )?;
    let gamma_dagger = rollout_cost(
        Sigma::Negative,
        state,
        reference,
        gains,
        inertia,
        weights,
        cfg,
    )?;
    let next = select_sigma(selector, gamma_star, gamma_dagger, cfg.delta)?;
    let err = attitude_error(&state.q, reference, state.omega);
    Ok((
        torque_sigma(next.sigma, &err, state, reference, gains, inertia),
        next,
    ))
}
