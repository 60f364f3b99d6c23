//! JSON configuration and report documents for the command-line front end,
//! plus the canned example scenarios shipped with the repository.

use serde::{Deserialize, Serialize};

use crate::controllability::{ControllabilityReport, SetKind, SystemPair};
use crate::model::{AirframeParams, EfficiencyVector};
use crate::sim::{FaultEvent, Gains, Scenario, Setpoints};
use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Input for `analyze`: which system and attainable set to test.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub params: AirframeParams,
    pub eta: EfficiencyVector,
    pub system: SystemPair,
    /// Attainable-set representation; only meaningful for the degraded
    /// system (defaults to the allocated set there, the exact set for the
    /// full system).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_kind: Option<SetKind>,
    /// Number of inclusion-test samples; omitted means no inclusion test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    pub input: AnalysisConfig,
    pub report: ControllabilityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion_violations: Option<usize>,
}

/// Input for `threshold` and `sweep`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub params: AirframeParams,
    /// Failed rotor (1-based); omitted means all six.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotor: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub rotor: usize,
    /// Bisected minimum per-rotor lift limit for degraded controllability.
    pub lift_threshold_n: f64,
    /// Closed form `(5/18)·m_a·g` for comparison.
    pub lift_threshold_analytic_n: f64,
    /// Bisected maximum hover thrust for the configured lift limit.
    pub thrust_threshold_n: f64,
    /// Closed form `(18/5)·K`.
    pub thrust_threshold_analytic_n: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub tool_version: String,
    pub input: ThresholdConfig,
    pub entries: Vec<ThresholdEntry>,
}

/// Input for `sweep`: degraded-controllability verdicts over a grid of lift
/// limits.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub params: AirframeParams,
    pub rotor: usize,
    pub k_min_n: f64,
    pub k_max_n: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_kind: Option<SetKind>,
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(Error::from)
}

/// Names of the canned scenarios shipped under `scenarios/`.
pub const BUILTIN_SCENARIOS: [&str; 4] = ["fig2", "fig3", "fig4", "fig5"];

/// The four example scenarios: nominal hover, a rotor-2 failure flown with
/// and without the degraded strategy, and the same failure with a lift limit
/// below the controllability threshold.
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let params = AirframeParams::prototype();
    let setpoints = Setpoints { h_c: 1.0, phi_c: 0.0, theta_c: 0.0, psi_c: 5.0 };
    let fault = vec![FaultEvent { time_s: 1.0, rotor: 2, eta: 0.0 }];
    let base = Scenario {
        params: params.clone(),
        setpoints,
        gains: Gains::default(),
        fault_events: vec![],
        dcs_enabled: true,
        duration_s: 20.0,
        dt_s: 0.001,
        detection_delay_s: 0.0,
        seed: 0,
        output_decimation: 10,
    };
    match name {
        "fig2" => Ok(base),
        "fig3" => Ok(Scenario { fault_events: fault, dcs_enabled: false, ..base }),
        "fig4" => Ok(Scenario { fault_events: fault, ..base }),
        "fig5" => Ok(Scenario {
            params: AirframeParams {
                max_lift_n: 4.9 / 18.0 * params.hover_thrust(),
                ..params
            },
            fault_events: fault,
            ..base
        }),
        other => Err(Error::Config(format!("unknown builtin scenario '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analysis_config_round_trips_byte_identically() {
        let cfg = AnalysisConfig {
            params: AirframeParams::prototype(),
            eta: EfficiencyVector::single_failure(2),
            system: SystemPair::Degraded,
            set_kind: Some(SetKind::AllocatedUa),
            samples: Some(10_000),
            seed: Some(7),
        };
        let text = to_canonical_json(&cfg).unwrap();
        let back: AnalysisConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(text, to_canonical_json(&back).unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{
            "params": {
                "mass_kg": 1.0, "gravity_mps2": 9.8, "arm_m": 0.3,
                "torque_ratio": 0.1, "inertia_roll": 0.04, "inertia_pitch": 0.05,
                "inertia_yaw": 0.06, "max_lift_n": 6.0
            },
            "eta": [1, 1, 1, 1, 1, 1],
            "system": "full",
            "surprise": true
        }"#;
        assert!(serde_json::from_str::<AnalysisConfig>(text).is_err());
    }

    #[test]
    fn builtin_scenarios_are_valid() {
        for name in BUILTIN_SCENARIOS {
            let s = builtin_scenario(name).unwrap();
            s.validate().unwrap();
        }
        assert!(builtin_scenario("fig9").is_err());
        // fig5's lift limit sits below the degraded threshold
        let s = builtin_scenario("fig5").unwrap();
        assert!(s.params.max_lift_n < 5.0 / 18.0 * s.params.hover_thrust());
    }
}
