//! Built-in scenarios.
//!
//! - `sec3_1`: real decay rates (0.2, 0.5, 0.8), γ = 1, six initial conditions.
//! - `sec3_2a`: (a, b, c) = (6.4, 3, 4), γ = 1, a dominant real rate.
//! - `sec3_2b`: (a, b, c) = (1.135, 4.187, 0.8), γ = 1, a dominant complex pair.
//! - `sec3_3`: (a, b, c) = (10, 1040, 8000), γ = 100, a lightly damped fast pair.

use crate::config::{ParamsSpec, RealRootsSpec, RootsSpec, ScenarioSpec, DEFAULT_OUTPUT_STEP};

pub const NAMES: [&str; 4] = ["sec3_1", "sec3_2a", "sec3_2b", "sec3_3"];

pub fn builtin(name: &str) -> Option<ScenarioSpec> {
    let params = |a, b, c, gamma| Some(ParamsSpec { a, b, c, gamma });
    let spec = match name {
        "sec3_1" => ScenarioSpec {
            name: Some(name.into()),
            params: None,
            roots: Some(RootsSpec::Real(RealRootsSpec {
                rates: [0.2, 0.5, 0.8],
                gamma: 1.0,
            })),
            initial: vec![
                [0.0, 0.5, 0.0],
                [12.5, 0.5, 0.0],
                [0.0, 1.5152, 0.0],
                [0.0, 2.5, 0.0],
                [12.5, 2.5, 0.0],
                [6.25, 2.5, -4.5],
            ],
            horizon: 500.0,
            output_step: DEFAULT_OUTPUT_STEP,
            tolerances: None,
        },
        "sec3_2a" => ScenarioSpec {
            name: Some(name.into()),
            params: params(6.4, 3.0, 4.0, 1.0),
            roots: None,
            initial: vec![[0.0, 0.2, 0.0], [0.0, 0.4, 0.0]],
            horizon: 60.0,
            output_step: DEFAULT_OUTPUT_STEP,
            tolerances: None,
        },
        "sec3_2b" => ScenarioSpec {
            name: Some(name.into()),
            params: params(1.135, 4.187, 0.8, 1.0),
            roots: None,
            initial: vec![[0.0, 0.3, 0.0], [1.0, 0.3, 0.0]],
            horizon: 200.0,
            output_step: DEFAULT_OUTPUT_STEP,
            tolerances: None,
        },
        "sec3_3" => ScenarioSpec {
            name: Some(name.into()),
            params: params(10.0, 1040.0, 8000.0, 100.0),
            roots: None,
            initial: vec![[0.0, 0.1, 0.0]],
            horizon: 30.0,
            output_step: DEFAULT_OUTPUT_STEP,
            tolerances: None,
        },
        _ => return None,
    };
    Some(spec)
}
