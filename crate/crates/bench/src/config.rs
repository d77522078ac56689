//! Experiment configuration files (TOML).
//!
//! A file describes the plant, gains, PFM weights, selector, simulation
//! timing and the maneuver grid. Unknown keys are rejected. Matrices accept a
//! few shorthands:
//!
//! ```toml
//! k_n = { inertia_multiple = 900.0 }        # 900·J
//! q = { identity_multiple = 1e-6 }          # 1e-6·I
//! inertia = { diagonal = [1.66e-5, 1.66e-5, 2.93e-5] }
//! r = { full = [[1, 0, 0], [0, 1, 0], [0, 0, 1]] }
//! ```

use std::path::{Path, PathBuf};

use mps_core::{
    ClosedLoopConfig, ControllerGains, ControllerKind, InertiaModel, Jitter, ManeuverSpec, Mat3,
    PfmWeights, SelectorConfig, Sigma, Vec3,
};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// The flight-test parameterization shipped with the crate.
pub const FLIGHT_TEST_TOML: &str = include_str!("../configs/flight_test.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSpec {
    Diagonal([f64; 3]),
    Full([[f64; 3]; 3]),
    IdentityMultiple(f64),
    InertiaMultiple(f64),
}

impl MatrixSpec {
    fn resolve(&self, inertia: Option<&InertiaModel>, field: &str) -> Result<Mat3> {
        let m = match *self {
            MatrixSpec::Diagonal([a, b, c]) => Mat3::diagonal(a, b, c),
            MatrixSpec::Full(rows) => Mat3::from_rows(rows),
            MatrixSpec::IdentityMultiple(s) => Mat3::IDENTITY.scaled(s),
            MatrixSpec::InertiaMultiple(s) => match inertia {
                Some(j) => j.matrix().scaled(s),
                None => {
                    return Err(BenchError::config(
                        field,
                        "inertia_multiple is not allowed here",
                    ))
                }
            },
        };
        if !m.is_symmetric_positive_definite() {
            return Err(BenchError::config(
                field,
                "matrix must be symmetric positive definite",
            ));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub inertia: MatrixSpec,
    /// Symmetric per-axis torque clamp (N·m); absent means unsaturated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque_limit: Option<[f64; 3]>,
    #[serde(default = "default_divergence_bound")]
    pub divergence_bound: f64,
}

fn default_divergence_bound() -> f64 {
    200.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub k_n: MatrixSpec,
    pub k_omega: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub r: MatrixSpec,
    pub q: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorSection {
    pub horizon: f64,
    pub prediction_dt: f64,
    pub delta: f64,
    #[serde(default = "default_sigma_init")]
    pub sigma_init: i64,
}

fn default_sigma_init() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JitterSection {
    #[serde(default)]
    pub attitude_rad: f64,
    #[serde(default)]
    pub rate_rad_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub control_dt: f64,
    pub scored_samples: usize,
    pub stage1_duration: f64,
    #[serde(default)]
    pub jitter: JitterSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub baseline: String,
    pub candidate: String,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            baseline: ControllerKind::Benchmark.name().to_owned(),
            candidate: ControllerKind::Mps.name().to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManeuverSection {
    pub id: String,
    /// Stage 2 spin rate (rad/s, body frame).
    pub omega0: [f64; 3],
    /// Stage 3 trigger angle (degrees).
    pub psi0_deg: f64,
}

/// The file as written by a user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub output_dir: PathBuf,
    pub plant: PlantSection,
    pub gains: GainsSection,
    pub weights: WeightsSection,
    pub selector: SelectorSection,
    pub simulation: SimulationSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(rename = "maneuver")]
    pub maneuvers: Vec<ManeuverSection>,
}

/// A checked configuration, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub seed: u64,
    pub trials: usize,
    pub output_dir: PathBuf,
    pub closed_loop: ClosedLoopConfig,
    pub maneuvers: Vec<NamedManeuver>,
    pub baseline: ControllerKind,
    pub candidate: ControllerKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedManeuver {
    pub id: String,
    pub spec: ManeuverSpec,
}

impl Experiment {
    pub fn maneuver(&self, id: &str) -> Result<&NamedManeuver> {
        self.maneuvers
            .iter()
            .find(|m| m.id == id)
            .ok_or_else(|| BenchError::config("maneuver", format!("no maneuver with id '{id}'")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            BenchError::config("<file>", e.message().replace('\n', " ").trim().to_owned())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            BenchError::config("--config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn flight_test() -> Self {
        Self::from_toml(FLIGHT_TEST_TOML).expect("shipped config parses")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<Experiment> {
        if self.trials < 1 {
            return Err(BenchError::config("trials", "must be >= 1"));
        }

        let inertia_m = self.plant.inertia.resolve(None, "plant.inertia")?;
        let inertia = InertiaModel::new(inertia_m)
            .map_err(|e| BenchError::config("plant.inertia", e.to_string()))?;
        let torque_limit = match self.plant.torque_limit {
            Some(l) if l.iter().all(|v| v.is_finite() && *v > 0.0) => Some(Vec3::from_array(l)),
            Some(_) => {
                return Err(BenchError::config(
                    "plant.torque_limit",
                    "entries must be > 0",
                ))
            }
            None => None,
        };
        if !(self.plant.divergence_bound > 0.0) {
            return Err(BenchError::config("plant.divergence_bound", "must be > 0"));
        }

        let gains = ControllerGains::new(
            self.gains.k_n.resolve(Some(&inertia), "gains.k_n")?,
            self.gains
                .k_omega
                .resolve(Some(&inertia), "gains.k_omega")?,
        )
        .map_err(|e| BenchError::config("gains", e.to_string()))?;
        let weights = PfmWeights::new(
            self.weights.r.resolve(Some(&inertia), "weights.r")?,
            self.weights.q.resolve(Some(&inertia), "weights.q")?,
        )
        .map_err(|e| BenchError::config("weights", e.to_string()))?;

        let s = &self.selector;
        if !(s.delta.is_finite() && s.delta > 0.0) {
            return Err(BenchError::config("selector.delta", "must be > 0"));
        }
        if !(s.prediction_dt > 0.0 && s.prediction_dt <= 0.01) {
            return Err(BenchError::config(
                "selector.prediction_dt",
                "must be in (0, 0.01] s",
            ));
        }
        if !(s.horizon.is_finite() && s.horizon >= s.prediction_dt) {
            return Err(BenchError::config(
                "selector.horizon",
                "must be >= prediction_dt",
            ));
        }
        let sigma_init = Sigma::try_from(s.sigma_init)
            .map_err(|e| BenchError::config("selector.sigma_init", e.to_string()))?;
        let selector = SelectorConfig::new(s.horizon, s.prediction_dt, s.delta, sigma_init)
            .map_err(|e| BenchError::config("selector", e.to_string()))?;

        let sim = &self.simulation;
        let jitter = Jitter {
            attitude: sim.jitter.attitude_rad,
            rate: sim.jitter.rate_rad_s,
        };
        if !(jitter.attitude >= 0.0 && jitter.attitude.is_finite()) {
            return Err(BenchError::config(
                "simulation.jitter.attitude_rad",
                "must be >= 0",
            ));
        }
        if !(jitter.rate >= 0.0 && jitter.rate.is_finite()) {
            return Err(BenchError::config(
                "simulation.jitter.rate_rad_s",
                "must be >= 0",
            ));
        }

        let parse_kind = |field: &str, name: &str| {
            ControllerKind::from_name(name).ok_or_else(|| {
                BenchError::config(
                    field,
                    format!("unknown controller '{name}' (continuous|benchmark|mps)"),
                )
            })
        };
        let baseline = parse_kind("sweep.baseline", &self.sweep.baseline)?;
        let candidate = parse_kind("sweep.candidate", &self.sweep.candidate)?;

        if self.maneuvers.is_empty() {
            return Err(BenchError::config(
                "maneuver",
                "at least one maneuver is required",
            ));
        }
        let mut maneuvers = Vec::with_capacity(self.maneuvers.len());
        for (i, m) in self.maneuvers.iter().enumerate() {
            let field = format!("maneuver[{i}]");
            if m.id.is_empty()
                || !m
                    .id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(BenchError::config(
                    format!("{field}.id"),
                    "must be non-empty and contain only [A-Za-z0-9_-]",
                ));
            }
            if maneuvers.iter().any(|n: &NamedManeuver| n.id == m.id) {
                return Err(BenchError::config(
                    format!("{field}.id"),
                    format!("duplicate id '{}'", m.id),
                ));
            }
            let spec = ManeuverSpec::new(
                Vec3::from_array(m.omega0),
                m.psi0_deg.to_radians(),
                sim.stage1_duration,
                sim.control_dt,
                sim.scored_samples,
            )
            .map_err(|e| BenchError::config(field.clone(), e.to_string()))?;
            maneuvers.push(NamedManeuver {
                id: m.id.clone(),
                spec,
            });
        }

        Ok(Experiment {
            seed: self.seed,
            trials: self.trials,
            output_dir: self.output_dir.clone(),
            closed_loop: ClosedLoopConfig {
                inertia,
                gains,
                weights,
                selector,
                torque_limit,
                divergence_bound: self.plant.divergence_bound,
                jitter,
            },
            maneuvers,
            baseline,
            candidate,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_matches_flight_test_parameters() {
        let exp = ExperimentConfig::flight_test().validate().unwrap();
        let cl = &exp.closed_loop;
        let j = InertiaModel::crazyflie();
        assert_eq!(cl.inertia, j);
        assert_eq!(cl.gains, ControllerGains::flight_test(&j));
        assert_eq!(cl.weights, PfmWeights::flight_test());
        assert_eq!(cl.selector, SelectorConfig::flight_test());
        assert_eq!(exp.maneuvers[0].spec.control_dt(), 0.002);
        assert!(exp
            .maneuvers
            .iter()
            .all(|m| m.spec.n_samples_stage3() == 1500));
        assert_eq!(exp.baseline, ControllerKind::Benchmark);
        assert_eq!(exp.candidate, ControllerKind::Mps);
    }

    #[test]
    fn non_positive_delta_names_the_field() {
        for delta in ["0.0", "-1e-7"] {
            let text = FLIGHT_TEST_TOML.replace("delta = 5e-7", &format!("delta = {delta}"));
            let err = ExperimentConfig::from_toml(&text)
                .unwrap()
                .validate()
                .unwrap_err();
            assert!(
                matches!(&err, BenchError::ConfigInvalid { field, .. } if field == "selector.delta"),
                "{err}"
            );
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = FLIGHT_TEST_TOML.replace("delta = 5e-7", "delta = 5e-7\nhorizon_s = 1.0");
        assert!(matches!(
            ExperimentConfig::from_toml(&text),
            Err(BenchError::ConfigInvalid { .. })
        ));
        let text = format!("bogus = 1\n{FLIGHT_TEST_TOML}");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn invalid_values_are_reported_by_field() {
        let cases = [
            ("sigma_init = 1", "sigma_init = 0", "selector.sigma_init"),
            ("trials = 10", "trials = 0", "trials"),
            (
                "k_n = { inertia_multiple = 900.0 }",
                "k_n = { inertia_multiple = -900.0 }",
                "gains.k_n",
            ),
            (
                "baseline = \"benchmark\"",
                "baseline = \"pid\"",
                "sweep.baseline",
            ),
        ];
        for (from, to, field) in cases {
            assert!(FLIGHT_TEST_TOML.contains(from), "{from}");
            let text = FLIGHT_TEST_TOML.replace(from, to);
            let err = ExperimentConfig::from_toml(&text)
                .unwrap()
                .validate()
                .unwrap_err();
            assert!(
                matches!(&err, BenchError::ConfigInvalid { field: f, .. } if f == field),
                "{err}"
            );
        }
    }

    #[test]
    fn inertia_cannot_reference_itself() {
        let mut cfg = ExperimentConfig::flight_test();
        cfg.plant.inertia = MatrixSpec::InertiaMultiple(1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn serialized_config_reloads_identically() {
        let cfg = ExperimentConfig::flight_test();
        let mut cfg2 = cfg.clone();
        cfg2.plant.torque_limit = Some([1e-3, 1e-3, 2e-3]);
        cfg2.weights.r = MatrixSpec::Full([[1.0, 0.1, 0.0], [0.1, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        for c in [cfg, cfg2] {
            let reloaded = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(reloaded, c);
            assert_eq!(reloaded.validate().unwrap(), c.validate().unwrap());
        }
    }
}
