//! Scenario configuration: JSON schema, defaults, and cross-field
//! validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use dprd_core::atg::{ChannelEnvironment, TrajectoryConfig};
use dprd_core::channel::{PowerBudget, TransmissionModel};
use dprd_core::lyari::OptimizerConfig;
use dprd_core::oracle::GridSpec;
use dprd_core::slot::SlotContext;
use dprd_core::source::{self, DelayModel, PowerModel, RateDistortionModel, SigmaModel};

/// Drift-plus-penalty weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub v: f64,
    pub rho1: f64,
    pub rho2: f64,
}

/// Admissible decision intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Boxes {
    pub lambda: [f64; 2],
    pub q: [f64; 2],
    pub pt_mw: [f64; 2],
}

/// One simulation scenario. Missing fields take the bundled baseline
/// defaults; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub environment: ChannelEnvironment,
    pub trajectory: TrajectoryConfig,
    pub sigma: SigmaModel,
    pub rate_distortion: RateDistortionModel,
    pub delay: DelayModel,
    pub power: PowerModel,
    pub transmission: TransmissionModel,
    /// Maximum total UAV power (mW).
    pub p_max_mw: f64,
    pub weights: Weights,
    /// Total end-to-end delay budget (s).
    pub d_max_s: f64,
    /// Tolerable transmission delay (s).
    pub d_max_trans_s: f64,
    /// Source symbols per second; converts bits/symbol to bps.
    pub symbol_rate: f64,
    pub boxes: Boxes,
    pub optimizer: OptimizerConfig,
    /// Number of slots to simulate.
    pub horizon_slots: u64,
    pub oracle_grid: GridSpec,
    /// Compute the brute-force oracle gap every n slots (0 = never).
    pub oracle_every: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            environment: ChannelEnvironment {
                a: 9.61,
                b: 0.16,
                eta_los_db: 1.0,
                eta_nlos_db: 20.0,
                carrier_hz: 2e9,
                propagation_speed: 3e8,
            },
            trajectory: TrajectoryConfig {
                center: [250.0, 250.0],
                radius: 250.0,
                altitude: 500.0,
                speed: 20.0,
                ecv: [50.0, 50.0],
                slot_duration: 1.0,
            },
            sigma: SigmaModel { a1: 5.0, a2: 0.1, a3: 2.0, a4: 0.05 },
            rate_distortion: RateDistortionModel { c: 0.0015, k: 0.55, mu: 0.1 },
            delay: DelayModel { d1: 0.01, d2: 285.0, d3: 0.15, d4: 0.25, frames_per_slot: 1.0 },
            power: PowerModel { k: 1.3e-24, f_clk_hz: 1e9, circuit_mw: 100.0 },
            transmission: TransmissionModel {
                bandwidth_hz: 1e7,
                noise_mw: 1e-10,
                unit_bits: 1e6,
            },
            p_max_mw: 2000.0,
            weights: Weights { v: 4.0, rho1: 2.0, rho2: 0.01 },
            d_max_s: 3.0,
            d_max_trans_s: 0.02,
            // CIF geometry at 30 fps
            symbol_rate: 352.0 * 288.0 * 30.0,
            boxes: Boxes { lambda: [1.0, 32.0], q: [5.04, 228.0], pt_mw: [1.0, 600.0] },
            optimizer: OptimizerConfig {
                initial: dprd_core::source::DecisionTriple {
                    lambda: 4.0,
                    q: 30.0,
                    pt_mw: 100.0,
                },
                x_init: 1e6,
                ..OptimizerConfig::default()
            },
            horizon_slots: 40,
            oracle_grid: GridSpec {
                lambda_min: 1,
                lambda_max: 32,
                qp_min: 18,
                qp_max: 51,
                pt_samples: 200,
            },
            oracle_every: 0,
        }
    }
}

/// Configuration load/validation failures.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config schema error: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid config field {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

impl ScenarioConfig {
    /// Validate every model block and all cross-field constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.environment.validate().map_err(|e| invalid("environment", e))?;
        self.trajectory.validate().map_err(|e| invalid("trajectory", e))?;
        self.sigma.validate().map_err(|e| invalid("sigma", e))?;
        self.rate_distortion.validate().map_err(|e| invalid("rate_distortion", e))?;
        self.delay.validate().map_err(|e| invalid("delay", e))?;
        self.power.validate().map_err(|e| invalid("power", e))?;
        self.transmission.validate().map_err(|e| invalid("transmission", e))?;
        self.oracle_grid.validate().map_err(|e| invalid("oracle_grid", e))?;

        if !(self.p_max_mw > 0.0) {
            return Err(invalid("p_max_mw", "must be positive"));
        }
        self.budget().validate().map_err(|e| invalid("p_max_mw", e))?;
        if !(self.weights.v >= 0.0 && self.weights.rho1 >= 0.0 && self.weights.rho2 >= 0.0) {
            return Err(invalid("weights", "must be non-negative"));
        }
        if !(self.d_max_trans_s > 0.0) {
            return Err(invalid("d_max_trans_s", "must be positive"));
        }
        if self.d_max_trans_s > self.d_max_s {
            return Err(invalid(
                "d_max_trans_s",
                format!(
                    "transmission delay budget {} exceeds total budget {}",
                    self.d_max_trans_s, self.d_max_s
                ),
            ));
        }
        if !(self.symbol_rate > 0.0) {
            return Err(invalid("symbol_rate", "must be positive"));
        }
        for (name, b) in [
            ("boxes.lambda", self.boxes.lambda),
            ("boxes.q", self.boxes.q),
            ("boxes.pt_mw", self.boxes.pt_mw),
        ] {
            if !(b[0] > 0.0 && b[1] >= b[0]) {
                return Err(invalid("boxes", format!("{name} must satisfy 0 < lo <= hi")));
            }
        }
        if self.horizon_slots == 0 {
            return Err(invalid("horizon_slots", "must be at least 1"));
        }
        if self.optimizer.r_max == 0 {
            return Err(invalid("optimizer.r_max", "must be at least 1"));
        }
        if !(self.optimizer.conv_tol > 0.0) {
            return Err(invalid("optimizer.conv_tol", "must be positive"));
        }
        if !(self.optimizer.x_init >= 0.0) {
            return Err(invalid("optimizer.x_init", "must be non-negative"));
        }
        Ok(())
    }

    /// Power budget with the encoding power derived from the clock model.
    pub fn budget(&self) -> PowerBudget {
        PowerBudget {
            p_max_mw: self.p_max_mw,
            p_circuit_mw: self.power.circuit_mw,
            p_encode_mw: source::coding_power(&self.power),
        }
    }

    /// Slot-context template; `queue_plus` and `l_atg_linear` are filled
    /// per slot by the horizon driver.
    pub fn slot_template(&self) -> SlotContext {
        SlotContext {
            queue_plus: 0.0,
            l_atg_linear: 1.0,
            sigma: self.sigma,
            rd: self.rate_distortion,
            delay: self.delay,
            transmission: self.transmission,
            budget: self.budget(),
            v: self.weights.v,
            rho1: self.weights.rho1,
            rho2: self.weights.rho2,
            d_max_s: self.d_max_s,
            d_max_trans_s: self.d_max_trans_s,
            symbol_rate: self.symbol_rate,
            lambda_box: (self.boxes.lambda[0], self.boxes.lambda[1]),
            q_box: (self.boxes.q[0], self.boxes.q[1]),
            pt_box: (self.boxes.pt_mw[0], self.boxes.pt_mw[1]),
        }
    }
}

/// Load and validate a scenario from a JSON file.
pub fn load_scenario(path: &std::path::Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let config: ScenarioConfig = serde_json::from_str(&text)?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let config = ScenarioConfig::default();
        config.validate().unwrap();
        assert_eq!(config.symbol_rate, 3_041_280.0);
        // encoding power from the clock model: 1.3e-24 * (1e9)^3 = 1300 mW
        assert!((config.budget().p_encode_mw - 1300.0).abs() < 1e-9);
        assert!((config.budget().pt_headroom_mw() - 600.0).abs() < 1e-9);
    }

    #[test]
    fn round_trip_is_identity() {
        let config = ScenarioConfig::default();
        let json = serde_json::to_string_pretty(&config).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn empty_object_takes_defaults() {
        let config: ScenarioConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(config, ScenarioConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<ScenarioConfig>(r#"{"frobnicate": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn cross_field_checks() {
        let mut config = ScenarioConfig::default();
        config.d_max_trans_s = config.d_max_s + 1.0;
        assert!(matches!(config.validate(), Err(ConfigError::Invalid { field, .. }) if field == "d_max_trans_s"));

        let mut config = ScenarioConfig::default();
        config.p_max_mw = 1000.0; // below circuit + encoding power
        assert!(config.validate().is_err());

        let mut config = ScenarioConfig::default();
        config.horizon_slots = 0;
        assert!(config.validate().is_err());
    }
}
