//! System definition shared by every other module.
//!
//! The plant is `y''' + a·y'' + b·y' + c·y = −γ·sign(y'')` with state
//! `x = (x1, x2, x3)`, where `x3` is the relay input. Characteristic roots are
//! stored as positive *decay rates* throughout: a rate `λ` stands for the
//! root `−λ` and the mode `e^{−λt}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cubic::{solve_monic_cubic, CubicRoots};

/// Relative gap below which two real decay rates count as repeated.
pub const DISTINCT_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("decay rates {0:?} are not pairwise distinct")]
    RootsNotDistinct([f64; 3]),
    #[error("damping ratio {0} is outside (0, 1]")]
    DampingOutOfRange(f64),
    #[error("state component {0} is not finite")]
    NonFiniteState(&'static str),
}

fn positive(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ModelError::NonPositive { name, value })
    }
}

/// Coefficients `a, b, c` and relay gain `γ`, all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    a: f64,
    b: f64,
    c: f64,
    gamma: f64,
}

impl SystemParams {
    pub fn new(a: f64, b: f64, c: f64, gamma: f64) -> Result<Self, ModelError> {
        Ok(Self {
            a: positive("a", a)?,
            b: positive("b", b)?,
            c: positive("c", c)?,
            gamma: positive("gamma", gamma)?,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Distance `γ/c` of the two attraction points from the origin.
    pub fn attractor_offset(&self) -> f64 {
        self.gamma / self.c
    }

    /// Same plant with a different relay gain.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self, ModelError> {
        Self::new(self.a, self.b, self.c, gamma)
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace::from_params(self)
    }
}

/// Whether two real decay rates are separated enough for the
/// distinct-root closed form.
pub fn rates_distinct(x: f64, y: f64) -> bool {
    (x - y).abs() > DISTINCT_REL_TOL * x.abs().max(y.abs()).max(1.0)
}

/// Eigenstructure of `s³ + a·s² + b·s + c`.
///
/// Values returned by [`roots_from_params`] are not validated: an unstable
/// polynomial shows up as a non-positive rate or a negative `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootConfig {
    /// Three distinct real decay rates, ascending.
    ThreeDistinctReal { rates: [f64; 3] },
    /// Real rate `lambda1` and the pair `−δω0 ± jω0√(1−δ²)`.
    /// `delta = 1` encodes a repeated real pair.
    RealPlusComplexPair { lambda1: f64, omega0: f64, delta: f64 },
}

impl RootConfig {
    pub fn three_real(rates: [f64; 3]) -> Result<Self, ModelError> {
        let mut rates = rates;
        rates.sort_by(f64::total_cmp);
        let cfg = RootConfig::ThreeDistinctReal { rates };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn complex_pair(lambda1: f64, omega0: f64, delta: f64) -> Result<Self, ModelError> {
        let cfg = RootConfig::RealPlusComplexPair { lambda1, omega0, delta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            RootConfig::ThreeDistinctReal { rates } => {
                positive("lambda1", rates[0])?;
                positive("lambda2", rates[1])?;
                positive("lambda3", rates[2])?;
                let [l1, l2, l3] = rates;
                if !(rates_distinct(l1, l2) && rates_distinct(l2, l3) && rates_distinct(l1, l3)) {
                    return Err(ModelError::RootsNotDistinct(rates));
                }
                Ok(())
            }
            RootConfig::RealPlusComplexPair { lambda1, omega0, delta } => {
                positive("lambda1", lambda1)?;
                positive("omega0", omega0)?;
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(ModelError::DampingOutOfRange(delta));
                }
                Ok(())
            }
        }
    }

    /// Like [`RootConfig::validate`] but also accepts a non-decaying pair
    /// (`-1 < delta <= 0`), which is how `ab <= c` shows up for positive
    /// coefficients.
    pub fn validate_dynamics(&self) -> Result<(), ModelError> {
        match *self {
            RootConfig::RealPlusComplexPair { lambda1, omega0, delta } if delta <= 0.0 => {
                positive("lambda1", lambda1)?;
                positive("omega0", omega0)?;
                if delta > -1.0 {
                    Ok(())
                } else {
                    Err(ModelError::DampingOutOfRange(delta))
                }
            }
            _ => self.validate(),
        }
    }

    /// The three decay rates as complex numbers; characteristic roots are
    /// their negations.
    pub fn decay_rates(&self) -> [Complex64; 3] {
        match *self {
            RootConfig::ThreeDistinctReal { rates } => rates.map(|r| Complex64::new(r, 0.0)),
            RootConfig::RealPlusComplexPair { lambda1, omega0, delta } => {
                let re = delta * omega0;
                let im = omega0 * (1.0 - delta * delta).max(0.0).sqrt();
                [
                    Complex64::new(lambda1, 0.0),
                    Complex64::new(re, -im),
                    Complex64::new(re, im),
                ]
            }
        }
    }

    /// True when every mode decays.
    pub fn is_stable(&self) -> bool {
        self.decay_rates().iter().all(|r| r.re > 0.0)
    }

    /// Smallest real part among the decay rates.
    pub fn slowest_rate(&self) -> f64 {
        self.decay_rates().iter().map(|r| r.re).fold(f64::INFINITY, f64::min)
    }

    /// Polynomial coefficients `(a, b, c)` without validation.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        match *self {
            RootConfig::ThreeDistinctReal { rates: [l1, l2, l3] } => {
                (l1 + l2 + l3, l2 * l3 + l1 * l2 + l1 * l3, l1 * l2 * l3)
            }
            RootConfig::RealPlusComplexPair { lambda1, omega0, delta } => (
                2.0 * delta * omega0 + lambda1,
                2.0 * delta * omega0 * lambda1 + omega0 * omega0,
                lambda1 * omega0 * omega0,
            ),
        }
    }

    pub fn to_params(&self, gamma: f64) -> Result<SystemParams, ModelError> {
        self.validate()?;
        let (a, b, c) = self.coefficients();
        SystemParams::new(a, b, c, gamma)
    }
}

/// `a = Σλ`, `b = Σλiλj`, `c = Πλ` for three distinct positive decay rates.
pub fn params_from_real_roots(rates: [f64; 3], gamma: f64) -> Result<SystemParams, ModelError> {
    RootConfig::three_real(rates)?.to_params(gamma)
}

/// `a = 2δω0 + λ1`, `b = 2δω0λ1 + ω0²`, `c = λ1ω0²`.
pub fn params_from_complex_roots(
    lambda1: f64,
    omega0: f64,
    delta: f64,
    gamma: f64,
) -> Result<SystemParams, ModelError> {
    RootConfig::complex_pair(lambda1, omega0, delta)?.to_params(gamma)
}

fn confluent_pair(lambda1: f64, p: f64, q: f64) -> RootConfig {
    let prod = p * q;
    let mean = 0.5 * (p + q);
    let (omega0, delta) = if prod > 0.0 {
        let w = prod.sqrt();
        // AM-GM puts |mean| ≥ w; clamp the rounding excess
        (w, (mean / w).clamp(-1.0, 1.0))
    } else {
        (mean.abs(), mean.signum())
    };
    RootConfig::RealPlusComplexPair { lambda1, omega0, delta }
}

/// Classifies the roots of `s³ + a·s² + b·s + c`.
///
/// Real rates closer than [`DISTINCT_REL_TOL`] are reported as a
/// `RealPlusComplexPair` with `delta = 1`.
pub fn roots_from_params(params: &SystemParams) -> RootConfig {
    match solve_monic_cubic(params.a, params.b, params.c) {
        CubicRoots::ThreeReal(roots) => {
            // ascending roots → descending rates; re-sort ascending
            let mut rates = roots.map(|r| -r);
            rates.sort_by(f64::total_cmp);
            let [r0, r1, r2] = rates;
            if !rates_distinct(r0, r1) {
                confluent_pair(r2, r0, r1)
            } else if !rates_distinct(r1, r2) {
                confluent_pair(r0, r1, r2)
            } else {
                RootConfig::ThreeDistinctReal { rates }
            }
        }
        CubicRoots::RealAndPair { real, re, im } => {
            let omega0 = re.hypot(im);
            RootConfig::RealPlusComplexPair {
                lambda1: -real,
                omega0,
                delta: -re / omega0,
            }
        }
    }
}

/// Sign of the active relay branch or of an attractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaySign {
    Positive,
    Negative,
}

impl RelaySign {
    pub fn value(self) -> f64 {
        match self {
            RelaySign::Positive => 1.0,
            RelaySign::Negative => -1.0,
        }
    }

    /// Sign of `v`; zero maps to `Positive`.
    pub fn of(v: f64) -> Self {
        if v < 0.0 {
            RelaySign::Negative
        } else {
            RelaySign::Positive
        }
    }

    pub fn flip(self) -> Self {
        match self {
            RelaySign::Positive => RelaySign::Negative,
            RelaySign::Negative => RelaySign::Positive,
        }
    }
}

/// Time-stamped state `(t, x1, x2, x3) = (t, y, y', y'')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl State {
    pub const fn new(t: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self { t, x1, x2, x3 }
    }

    /// Initial state `(C1, C2, C3)` at `t = 0`.
    pub const fn initial(c1: f64, c2: f64, c3: f64) -> Self {
        Self::new(0.0, c1, c2, c3)
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn check_finite(&self) -> Result<(), ModelError> {
        for (name, v) in [("t", self.t), ("x1", self.x1), ("x2", self.x2), ("x3", self.x3)] {
            if !v.is_finite() {
                return Err(ModelError::NonFiniteState(name));
            }
        }
        Ok(())
    }

    /// Largest componentwise difference in `(x1, x2, x3)`.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        (self.x1 - other.x1)
            .abs()
            .max((self.x2 - other.x2).abs())
            .max((self.x3 - other.x3).abs())
    }
}

/// Companion realization `ẋ = A·x − B·sign(C·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateSpace {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
}

impl StateSpace {
    pub fn from_params(p: &SystemParams) -> Self {
        Self {
            a: [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-p.c, -p.b, -p.a]],
            b: [0.0, 0.0, p.gamma],
            c: [0.0, 0.0, 1.0],
        }
    }

    pub fn apply_a(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (row, o) in self.a.iter().zip(out.iter_mut()) {
            *o = row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
        }
        out
    }

    /// `C·B`, equal to `γ`.
    pub fn cb(&self) -> f64 {
        self.c.iter().zip(&self.b).map(|(c, b)| c * b).sum()
    }
}
