//! Stability certificate for the linear part and the relay loop.
//!
//! Three independent checks: the Routh–Hurwitz inequality `ab > c`, the
//! closed-form solution of `PA + AᵀP = −I`, and a first-harmonic balance of
//! the relay describing function `N(A) = 4γ/(πA)` against `G(jω)`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::cubic::{solve_monic_cubic, CubicRoots};
use crate::sysmodel::{RelaySign, SystemParams};

/// Leading principal minors must exceed this to call `P` positive definite.
pub const MINOR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("Lyapunov solution is singular on the stability boundary ab = c (ab = {ab}, c = {c})")]
    GasBoundary { ab: f64, c: f64 },
}

/// Routh–Hurwitz for `s³ + as² + bs + c` with positive coefficients.
pub fn gas_check(params: &SystemParams) -> bool {
    params.a() * params.b() > params.c()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovCertificate {
    /// Symmetric solution of `PA + AᵀP = −I`.
    pub p: [[f64; 3]; 3],
    /// Frobenius norm of `PA + AᵀP + I`.
    pub residual_norm: f64,
    pub min_eigenvalue: f64,
    /// Leading principal minors all above [`MINOR_THRESHOLD`].
    pub positive_definite: bool,
}

impl LyapunovCertificate {
    /// `xᵀPx`.
    pub fn quadratic_form(&self, x: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += x[i] * self.p[i][j] * x[j];
            }
        }
        acc
    }
}

/// `PA + AᵀP + I` for the companion matrix of `params`.
pub fn lyapunov_residual(params: &SystemParams, p: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let a = params.state_space().a;
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut pa = 0.0;
            let mut atp = 0.0;
            for k in 0..3 {
                pa += p[i][k] * a[k][j];
                atp += a[k][i] * p[k][j];
            }
            r[i][j] = pa + atp + if i == j { 1.0 } else { 0.0 };
        }
    }
    r
}

fn frobenius(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn leading_minors(p: &[[f64; 3]; 3]) -> [f64; 3] {
    let m1 = p[0][0];
    let m2 = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    [m1, m2, det3(p)]
}

fn det3(p: &[[f64; 3]; 3]) -> f64 {
    p[0][0] * (p[1][1] * p[2][2] - p[1][2] * p[2][1]) - p[0][1] * (p[1][0] * p[2][2] - p[1][2] * p[2][0])
        + p[0][2] * (p[1][0] * p[2][1] - p[1][1] * p[2][0])
}

/// Smallest eigenvalue of a symmetric 3×3 matrix from its characteristic cubic.
pub fn symmetric_min_eigenvalue(p: &[[f64; 3]; 3]) -> f64 {
    let trace = p[0][0] + p[1][1] + p[2][2];
    let minors2 = (p[0][0] * p[1][1] - p[0][1] * p[1][0])
        + (p[0][0] * p[2][2] - p[0][2] * p[2][0])
        + (p[1][1] * p[2][2] - p[1][2] * p[2][1]);
    // λ³ − tr·λ² + m2·λ − det
    match solve_monic_cubic(-trace, minors2, -det3(p)) {
        CubicRoots::ThreeReal(r) => r[0],
        // rounding can turn a near-double eigenvalue into a tiny complex pair
        CubicRoots::RealAndPair { real, re, .. } => real.min(re),
    }
}

/// Closed-form `P` for `Q = I`.
pub fn solve_lyapunov_closed_form(params: &SystemParams) -> Result<LyapunovCertificate, StabilityError> {
    let (a, b, c) = (params.a(), params.b(), params.c());
    let ab = a * b;
    let gap = c - ab;
    if gap.abs() <= 4.0 * f64::EPSILON * ab.max(c) {
        return Err(StabilityError::GasBoundary { ab, c });
    }
    let d = 2.0 * c * gap;
    let p11 = -(c * (a * a + a * c - b + c * c) + a * b * b) / d;
    let p12 = -(a * a * b + c * c * (b + 1.0)) / d;
    let p13 = 1.0 / (2.0 * c);
    let p22 = -(a * (a * a + a * c + c * c) + c * (b * b + b + 1.0)) / d;
    let p23 = -(a * (a + c) + c * c) / d;
    let p33 = -(a + c * (b + 1.0)) / d;
    let p = [[p11, p12, p13], [p12, p22, p23], [p13, p23, p33]];

    let residual_norm = frobenius(&lyapunov_residual(params, &p));
    let positive_definite = leading_minors(&p).iter().all(|m| *m > MINOR_THRESHOLD);
    Ok(LyapunovCertificate {
        p,
        residual_norm,
        min_eigenvalue: symmetric_min_eigenvalue(&p),
        positive_definite,
    })
}

/// Final value `(x1, x2)` of the linear part after a relay switch of size `±2γ`.
pub fn steady_state_after_switch(params: &SystemParams, switch: RelaySign) -> (f64, f64) {
    (switch.value() * 2.0 * params.gamma() / params.c(), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicBalanceReport {
    /// Frequency where `Im α(jω) = 0`, i.e. `√b`.
    pub candidate_omega: f64,
    /// First-harmonic amplitude solving the real part; negative or infinite
    /// means no solution.
    pub candidate_amplitude: f64,
    pub limit_cycle_predicted: bool,
}

/// Solves `1 − 4γω² / (πA·α(jω)) = 0` analytically.
///
/// The imaginary part vanishes only at `ω² = b`; the real part then gives
/// `A = 4γb / (π(c − ab))`, a positive amplitude only when `c > ab`. On the
/// boundary `ab = c` the amplitude is infinite and no cycle is predicted.
pub fn harmonic_balance(params: &SystemParams) -> HarmonicBalanceReport {
    let (a, b, c) = (params.a(), params.b(), params.c());
    let amplitude = 4.0 * params.gamma() * b / (PI * (c - a * b));
    HarmonicBalanceReport {
        candidate_omega: b.sqrt(),
        candidate_amplitude: amplitude,
        limit_cycle_predicted: amplitude.is_finite() && amplitude > 0.0,
    }
}
