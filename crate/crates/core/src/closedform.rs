//! Exact slip-phase trajectories.
//!
//! While `x3` keeps its sign the relay is a constant forcing `Γ = ±γ` and
//! `x1` solves `x1''' + a·x1'' + b·x1' + c·x1 = −Γ`. The solution is the
//! constant `−Γ/c` plus three exponential modes. Mode amplitudes are built
//! from the explicit K-coefficient formulas for both root configurations;
//! `x2` and `x3` are the analytic first and second derivatives.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::sysmodel::{rates_distinct, ModelError, RootConfig, State, SystemParams};

/// Relative tolerance when checking that a root configuration belongs to
/// the given coefficients.
pub const ROOT_MATCH_REL_TOL: f64 = 1e-8;
/// Bound on the imaginary residue of an assembled complex-branch solution,
/// relative to `max(1, amplitude scale)`.
pub const REALNESS_TOL: f64 = 1e-9;
/// Shift applied to a repeated pair of decay rates.
pub const PAIR_PERTURBATION: f64 = 1e-6;
/// Shift applied to a triple decay rate; balances the O(ε²) model error
/// against the O(ε⁻²) cancellation in the amplitudes.
pub const TRIPLE_PERTURBATION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("relay value {gamma_active} does not have magnitude gamma = {gamma}")]
    RelayMagnitude { gamma_active: f64, gamma: f64 },
    #[error("root configuration gives (a, b, c) = {from_roots:?}, expected {expected:?}")]
    RootMismatch {
        from_roots: (f64, f64, f64),
        expected: (f64, f64, f64),
    },
    #[error(transparent)]
    InvalidRoots(#[from] ModelError),
    #[error("complex-branch solution has imaginary residue {residue:e}")]
    NotReal { residue: f64 },
}

/// One exponential term `amplitude · e^{−rate·t}` of `x1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub amplitude: Complex64,
    pub rate: Complex64,
}

/// The explicit coefficients, kept for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficients {
    Real {
        k1: f64,
        k2: f64,
        k3: f64,
    },
    Complex {
        k4: Complex64,
        k5: Complex64,
        /// Amplitude of the `e^{−λ1 t}` term.
        real_term: f64,
    },
}

/// Closed-form slip trajectory from a given entry state.
#[derive(Debug, Clone, PartialEq)]
pub struct SlipSolution {
    params: SystemParams,
    roots: RootConfig,
    gamma_active: f64,
    initial: State,
    offset: f64,
    modes: [Mode; 3],
    coefficients: Coefficients,
    perturbation: Option<f64>,
    imag_residue: f64,
    t_limit: f64,
}

/// Values of `x1 … x3` and `ẋ3` at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivatives {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x3_dot: f64,
}

fn real_coefficients(rates: [f64; 3], gamma_active: f64, init: &State) -> (Coefficients, [Mode; 3], f64) {
    let [l1, l2, l3] = rates;
    let (c1, c2, c3) = (init.x1, init.x2, init.x3);
    let prod = l1 * l2 * l3;
    let k1 = (gamma_active + c3 * l1 + c2 * l1 * (l2 + l3) + c1 * prod) / (l1 * (l1 - l2) * (l1 - l3));
    let k2 = (gamma_active + c3 * l2 + c2 * l2 * (l1 + l3) + c1 * prod) / (l2 * (l1 - l2) * (l2 - l3));
    let k3 = (gamma_active + c3 * l3 + c2 * l3 * (l1 + l2) + c1 * prod) / (l3 * (l1 - l3) * (l2 - l3));
    let re = |v: f64| Complex64::new(v, 0.0);
    let modes = [
        Mode {
            amplitude: re(k1),
            rate: re(l1),
        },
        Mode {
            amplitude: re(-k2),
            rate: re(l2),
        },
        Mode {
            amplitude: re(k3),
            rate: re(l3),
        },
    ];
    (Coefficients::Real { k1, k2, k3 }, modes, -gamma_active / prod)
}

fn complex_coefficients(
    lambda1: f64,
    omega0: f64,
    delta: f64,
    gamma_active: f64,
    init: &State,
) -> (Coefficients, [Mode; 3], f64) {
    let (l1, w0, d, g) = (lambda1, omega0, delta, gamma_active);
    let (c1, c2, c3) = (init.x1, init.x2, init.x3);
    let w2 = w0 * w0;
    // principal branches; both equal j√(1−δ²) for 0 < δ < 1
    let s = Complex64::new(d * d - 1.0, 0.0).sqrt();
    let s_split = Complex64::new(1.0 - d, 0.0).sqrt() * Complex64::new(-d - 1.0, 0.0).sqrt();

    let real_term = (c1 * l1 * w2 + 2.0 * c2 * d * l1 * w0 + g + c3 * l1) / (l1 * (l1 * l1 - 2.0 * d * l1 * w0 + w2));
    let k4 = c3 * w0 + d * g + g * s + c2 * l1 * w0 + c2 * d * w2 + c2 * w2 * s + c1 * l1 * w2 * (d + s);
    let k5 = c3 * w0 + d * g - g * s + c2 * l1 * w0 + c2 * d * w2 - c2 * w2 * s + c1 * l1 * w2 * (d - s);
    let a4 = k4 / (2.0 * w2 * s_split * (l1 - d * w0 + w0 * s));
    let a5 = k5 / (2.0 * w2 * s_split * (d * w0 - l1 + w0 * s));
    let modes = [
        Mode {
            amplitude: Complex64::new(real_term, 0.0),
            rate: Complex64::new(l1, 0.0),
        },
        Mode {
            amplitude: a4,
            rate: w0 * (d - s),
        },
        Mode {
            amplitude: a5,
            rate: w0 * (d + s_split),
        },
    ];
    (Coefficients::Complex { k4, k5, real_term }, modes, -g / (l1 * w2))
}

/// Spreads repeated rates apart so the distinct-root formula applies.
/// Returns the perturbed rates and the shift used.
fn split_confluent(lambda1: f64, centre: f64) -> ([f64; 3], f64) {
    if rates_distinct(lambda1, centre) {
        let eps = PAIR_PERTURBATION * centre.abs().max(1.0);
        let mut r = [lambda1, centre - eps, centre + eps];
        r.sort_by(f64::total_cmp);
        (r, eps)
    } else {
        let m = (lambda1 + 2.0 * centre) / 3.0;
        let eps = TRIPLE_PERTURBATION * m.abs().max(1.0);
        ([m - eps, m, m + eps], eps)
    }
}

/// Builds the slip solution with constant relay value `gamma_active` from `initial`.
pub fn build_slip_solution(
    params: &SystemParams,
    roots: &RootConfig,
    gamma_active: f64,
    initial: State,
) -> Result<SlipSolution, ClosedFormError> {
    let gamma = params.gamma();
    if (gamma_active.abs() - gamma).abs() > 1e-12 * gamma {
        return Err(ClosedFormError::RelayMagnitude { gamma_active, gamma });
    }
    initial.check_finite()?;
    roots.validate_dynamics()?;
    let from_roots = roots.coefficients();
    let expected = (params.a(), params.b(), params.c());
    let close = |x: f64, y: f64| (x - y).abs() <= ROOT_MATCH_REL_TOL * y.abs().max(1e-300);
    if !(close(from_roots.0, expected.0) && close(from_roots.1, expected.1) && close(from_roots.2, expected.2)) {
        return Err(ClosedFormError::RootMismatch { from_roots, expected });
    }

    let mut perturbation = None;
    let (coefficients, modes, offset) = match *roots {
        RootConfig::ThreeDistinctReal { rates } => real_coefficients(rates, gamma_active, &initial),
        RootConfig::RealPlusComplexPair { lambda1, omega0, delta } => {
            let separation = 2.0 * omega0 * (1.0 - delta * delta).max(0.0).sqrt();
            if separation <= crate::sysmodel::DISTINCT_REL_TOL * omega0.max(1.0) {
                let (rates, eps) = split_confluent(lambda1, delta * omega0);
                perturbation = Some(eps);
                real_coefficients(rates, gamma_active, &initial)
            } else {
                complex_coefficients(lambda1, omega0, delta, gamma_active, &initial)
            }
        }
    };

    let slowest = modes.iter().map(|m| m.rate.re).fold(f64::INFINITY, f64::min);
    let mut sol = SlipSolution {
        params: *params,
        roots: *roots,
        gamma_active,
        initial,
        offset,
        modes,
        coefficients,
        perturbation,
        imag_residue: 0.0,
        t_limit: if slowest > 0.0 {
            1e6 / slowest
        } else {
            // growing or undamped modes: stop before e^{|μ|t} overflows
            500.0 / slowest.abs().max(f64::MIN_POSITIVE)
        },
    };

    if matches!(coefficients, Coefficients::Complex { .. }) {
        let fastest = modes.iter().map(|m| m.rate.norm()).fold(0.0, f64::max);
        let span = (5.0 / slowest.abs().max(1e-3 * fastest)).min(sol.t_limit);
        let scale = sol.amplitude_scale().max(1.0);
        let residue = (0..10)
            .map(|k| sol.x1_complex(span * k as f64 / 9.0).im.abs())
            .fold(0.0, f64::max);
        if residue.is_nan() || residue > REALNESS_TOL * scale {
            return Err(ClosedFormError::NotReal { residue });
        }
        sol.imag_residue = residue;
    }
    Ok(sol)
}

impl SlipSolution {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn roots(&self) -> &RootConfig {
        &self.roots
    }

    /// Constant forcing `Γ`.
    pub fn gamma_active(&self) -> f64 {
        self.gamma_active
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    /// Limit of `x1` without further switching, `−Γ/c`.
    pub fn attractor(&self) -> f64 {
        self.offset
    }

    pub fn modes(&self) -> &[Mode; 3] {
        &self.modes
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// Shift applied to confluent decay rates, if any.
    pub fn perturbation(&self) -> Option<f64> {
        self.perturbation
    }

    /// Largest imaginary part seen while certifying a complex-branch solution.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    /// Local times beyond this are clamped in [`SlipSolution::eval`].
    pub fn saturation_time(&self) -> f64 {
        self.t_limit
    }

    /// `Σ|A_i|·max(1, |μ_i|)³`, a magnitude bound for `x1 … ẋ3`.
    pub fn amplitude_scale(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.amplitude.norm() * m.rate.norm().max(1.0).powi(3))
            .sum()
    }

    fn x1_complex(&self, t: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| m.amplitude * (-m.rate * t).exp())
            .sum::<Complex64>()
            + self.offset
    }

    /// `x1 … x3` and `ẋ3` at local time `t ≥ 0`.
    pub fn derivatives(&self, t: f64) -> Derivatives {
        let t = t.clamp(0.0, self.t_limit);
        let mut acc = [Complex64::new(0.0, 0.0); 4];
        for m in &self.modes {
            let e = m.amplitude * (-m.rate * t).exp();
            let de = -m.rate * e;
            let dde = -m.rate * de;
            acc[0] += e;
            acc[1] += de;
            acc[2] += dde;
            acc[3] += -m.rate * dde;
        }
        Derivatives {
            x1: self.offset + acc[0].re,
            x2: acc[1].re,
            x3: acc[2].re,
            x3_dot: acc[3].re,
        }
    }

    /// State at local time `t` (absolute time `initial.t + t`).
    pub fn eval(&self, t: f64) -> State {
        if t == 0.0 {
            return self.initial;
        }
        let d = self.derivatives(t);
        State::new(self.initial.t + t, d.x1, d.x2, d.x3)
    }

    /// `x3` only, for event scanning.
    pub fn x3_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.t_limit);
        self.modes
            .iter()
            .map(|m| (m.amplitude * m.rate * m.rate * (-m.rate * t).exp()).re)
            .sum()
    }
}

fn slip_rhs(p: &SystemParams, gamma_active: f64, x: [f64; 3]) -> [f64; 3] {
    [x[1], x[2], -p.c() * x[0] - p.b() * x[1] - p.a() * x[2] - gamma_active]
}

/// Fixed-step classical RK4 of the slip dynamics with constant `Γ`.
///
/// Returns the state at `t = 0, step, 2·step, …` and at `t_end`; the last
/// step is shortened when `t_end` is not a multiple of `step`.
pub fn reference_integrate(
    params: &SystemParams,
    gamma_active: f64,
    initial: State,
    t_end: f64,
    step: f64,
) -> Vec<State> {
    assert!(
        step > 0.0 && t_end >= 0.0,
        "step must be positive and t_end non-negative"
    );
    let n = (t_end / step - 1e-9).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut x = initial.vector();
    out.push(initial);
    let axpy = |x: [f64; 3], h: f64, k: [f64; 3]| [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]];
    for i in 0..n {
        let t0 = i as f64 * step;
        let t1 = ((i + 1) as f64 * step).min(t_end);
        let h = t1 - t0;
        let k1 = slip_rhs(params, gamma_active, x);
        let k2 = slip_rhs(params, gamma_active, axpy(x, 0.5 * h, k1));
        let k3 = slip_rhs(params, gamma_active, axpy(x, 0.5 * h, k2));
        let k4 = slip_rhs(params, gamma_active, axpy(x, h, k3));
        for j in 0..3 {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(State::new(initial.t + t1, x[0], x[1], x[2]));
    }
    out
}
