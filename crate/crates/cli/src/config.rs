//! Scenario configuration files.
//!
//! ```json
//! {
//!   "name": "demo",
//!   "roots": { "real": { "rates": [0.2, 0.5, 0.8], "gamma": 1.0 } },
//!   "initial": [[0.0, 0.5, 0.0]],
//!   "horizon": 500.0,
//!   "output_step": 0.001
//! }
//! ```
//!
//! Exactly one of `params` and `roots` must be present; unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stickslip::hybridsim::{SimConfig, Tolerances};
use stickslip::sysmodel::{params_from_complex_roots, params_from_real_roots, State, SystemParams};

use crate::error::CliError;

pub const DEFAULT_HORIZON: f64 = 500.0;
pub const DEFAULT_OUTPUT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealRootsSpec {
    pub rates: [f64; 3],
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexRootsSpec {
    pub lambda1: f64,
    pub omega0: f64,
    pub delta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RootsSpec {
    Real(RealRootsSpec),
    Complex(ComplexRootsSpec),
}

/// Optional overrides of the engine tolerances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stick_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest_velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_time_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_value_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chatter_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chatter_window: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            stick_margin: self.stick_margin.unwrap_or(base.stick_margin),
            rest_velocity: self.rest_velocity.or(base.rest_velocity),
            convergence_ratio: self.convergence_ratio.unwrap_or(base.convergence_ratio),
            scan_step: self.scan_step.or(base.scan_step),
            event_time_rel: self.event_time_rel.unwrap_or(base.event_time_rel),
            event_value_rel: self.event_value_rel.unwrap_or(base.event_value_rel),
            chatter_limit: self.chatter_limit.unwrap_or(base.chatter_limit),
            chatter_window: self.chatter_window.unwrap_or(base.chatter_window),
        }
    }
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}

fn default_output_step() -> f64 {
    DEFAULT_OUTPUT_STEP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<RootsSpec>,
    pub initial: Vec<[f64; 3]>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_output_step")]
    pub output_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

/// A spec checked and turned into engine inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScenario {
    pub name: String,
    pub params: SystemParams,
    pub initial: Vec<State>,
    pub config: SimConfig,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid scenario: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario specs always serialize")
    }

    pub fn gamma(&self) -> Option<f64> {
        match (&self.params, &self.roots) {
            (Some(p), _) => Some(p.gamma),
            (None, Some(RootsSpec::Real(r))) => Some(r.gamma),
            (None, Some(RootsSpec::Complex(r))) => Some(r.gamma),
            (None, None) => None,
        }
    }

    pub fn set_gamma(&mut self, gamma: f64) {
        if let Some(p) = &mut self.params {
            p.gamma = gamma;
        }
        match &mut self.roots {
            Some(RootsSpec::Real(r)) => r.gamma = gamma,
            Some(RootsSpec::Complex(r)) => r.gamma = gamma,
            None => {}
        }
    }

    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        let cfg = |e: stickslip::sysmodel::ModelError| CliError::Config(e.to_string());
        match (&self.params, &self.roots) {
            (Some(p), None) => SystemParams::new(p.a, p.b, p.c, p.gamma).map_err(cfg),
            (None, Some(RootsSpec::Real(r))) => params_from_real_roots(r.rates, r.gamma).map_err(cfg),
            (None, Some(RootsSpec::Complex(r))) => {
                params_from_complex_roots(r.lambda1, r.omega0, r.delta, r.gamma).map_err(cfg)
            }
            (Some(_), Some(_)) => Err(CliError::Config("give either `params` or `roots`, not both".into())),
            (None, None) => Err(CliError::Config("missing `params` or `roots`".into())),
        }
    }

    pub fn resolve(&self, allow_non_gas: bool) -> Result<ResolvedScenario, CliError> {
        let params = self.system_params()?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(CliError::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.output_step.is_finite() && self.output_step > 0.0) {
            return Err(CliError::Config(format!(
                "output_step must be positive, got {}",
                self.output_step
            )));
        }
        let mut initial = Vec::with_capacity(self.initial.len());
        for (k, ic) in self.initial.iter().enumerate() {
            if !ic.iter().all(|v| v.is_finite()) {
                return Err(CliError::Config(format!("initial[{k}] is not finite: {ic:?}")));
            }
            initial.push(State::initial(ic[0], ic[1], ic[2]));
        }
        let tolerances = self.tolerances.unwrap_or_default().apply(Tolerances::default());
        Ok(ResolvedScenario {
            name: self.name.clone().unwrap_or_else(|| "custom".into()),
            params,
            initial,
            config: SimConfig {
                horizon: self.horizon,
                output_step: self.output_step,
                tolerances,
                allow_non_gas,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_spec_with_defaults() {
        let spec = ScenarioSpec::from_json(r#"{"params":{"a":1.5,"b":0.66,"c":0.08,"gamma":1},"initial":[[0,0.5,0]]}"#)
            .unwrap();
        assert_eq!(spec.horizon, DEFAULT_HORIZON);
        assert_eq!(spec.output_step, DEFAULT_OUTPUT_STEP);
        let r = spec.resolve(false).unwrap();
        assert_eq!(r.initial, vec![State::initial(0.0, 0.5, 0.0)]);
    }

    #[test]
    fn rejects_unknown_keys_with_position() {
        let err = ScenarioSpec::from_json(
            "{\n \"params\": {\"a\":1,\"b\":1,\"c\":0.5,\"gamma\":1},\n \"initial\": [],\n \"horizn\": 3\n}",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("horizn") && msg.contains("line 4"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_unknown_nested_keys() {
        assert!(
            ScenarioSpec::from_json(r#"{"roots":{"real":{"rates":[1,2,3],"gamma":1,"x":0}},"initial":[]}"#).is_err()
        );
        assert!(ScenarioSpec::from_json(r#"{"roots":{"imaginary":{}},"initial":[]}"#).is_err());
    }

    #[test]
    fn requires_exactly_one_source() {
        let both =
            r#"{"params":{"a":1,"b":1,"c":0.5,"gamma":1},"roots":{"real":{"rates":[1,2,3],"gamma":1}},"initial":[]}"#;
        assert!(ScenarioSpec::from_json(both).unwrap().resolve(false).is_err());
        let none = r#"{"initial":[]}"#;
        assert!(ScenarioSpec::from_json(none).unwrap().resolve(false).is_err());
    }

    #[test]
    fn tolerance_overrides_apply() {
        let o = ToleranceOverrides {
            stick_margin: Some(1e-8),
            chatter_limit: Some(5),
            ..Default::default()
        };
        let t = o.apply(Tolerances::default());
        assert_eq!(t.stick_margin, 1e-8);
        assert_eq!(t.chatter_limit, 5);
        assert_eq!(t.convergence_ratio, Tolerances::default().convergence_ratio);
    }
}
