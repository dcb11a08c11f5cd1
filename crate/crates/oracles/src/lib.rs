//! Independent numerical oracles for the test suites.
//!
//! Nothing here depends on the main crate: each oracle works from the raw
//! coefficients `(a, b, c, γ)` with generic numerics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

/// Companion matrix of `s³ + a·s² + b·s + c` in the `(y, y', y'')` coordinates.
pub fn companion(a: f64, b: f64, c: f64) -> Matrix3<f64> {
    Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -c, -b, -a)
}

/// Eigenvalues of the companion matrix from a general eigensolver.
pub fn companion_eigenvalues(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    companion(a, b, c)
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

/// Solves `PA + AᵀP = −Q` as a dense linear system in the nine entries of `P`.
pub fn lyapunov_numeric(a: &Matrix3<f64>, q: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let mut m = DMatrix::<f64>::zeros(9, 9);
    let mut rhs = DVector::<f64>::zeros(9);
    let idx = |i: usize, j: usize| 3 * i + j;
    for i in 0..3 {
        for j in 0..3 {
            let row = idx(i, j);
            for k in 0..3 {
                // (PA)_ij = Σ_k P_ik A_kj
                m[(row, idx(i, k))] += a[(k, j)];
                // (AᵀP)_ij = Σ_k A_ki P_kj
                m[(row, idx(k, j))] += a[(k, i)];
            }
            rhs[row] = -q[(i, j)];
        }
    }
    let sol = m.lu().solve(&rhs)?;
    Some(Matrix3::from_fn(|i, j| sol[idx(i, j)]))
}

/// `1 − 4γω² / (πA·α(jω))` with `α(jω) = −jω³ − aω² + jbω + c`.
pub fn harmonic_balance_residual(a: f64, b: f64, c: f64, gamma: f64, omega: f64, amp: f64) -> Complex64 {
    let alpha = Complex64::new(c - a * omega * omega, b * omega - omega.powi(3));
    Complex64::new(1.0, 0.0) - 4.0 * gamma * omega * omega / (PI * amp * alpha)
}

/// Numeric harmonic-balance solve without using the analytic frequency.
///
/// For each `ω` the balance needs `A = T(ω) = 4γω²/(π·α(jω))`, so `T` must be
/// real and positive. Scans a log grid of `ω` for sign changes of `Im T`,
/// refines by bisection and returns every real solution `(ω, A)` with
/// `A ∈ (0, amp_max]`.
pub fn harmonic_balance_grid(
    a: f64,
    b: f64,
    c: f64,
    gamma: f64,
    omega_range: (f64, f64),
    amp_max: f64,
) -> Vec<(f64, f64)> {
    let t = |w: f64| {
        let alpha = Complex64::new(c - a * w * w, b * w - w.powi(3));
        4.0 * gamma * w * w / (PI * alpha)
    };
    let n = 20_000;
    let (lo, hi) = (omega_range.0.ln(), omega_range.1.ln());
    let grid = |k: usize| (lo + (hi - lo) * k as f64 / n as f64).exp();
    let mut out = Vec::new();
    let mut w_prev = grid(0);
    let mut im_prev = t(w_prev).im;
    for k in 1..=n {
        let w = grid(k);
        let im = t(w).im;
        if im_prev == 0.0 || im_prev.signum() != im.signum() {
            let (mut l, mut h) = (w_prev, w);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if t(mid).im.signum() == t(l).im.signum() && t(l).im != 0.0 {
                    l = mid;
                } else {
                    h = mid;
                }
            }
            let w_star = 0.5 * (l + h);
            let amp = t(w_star).re;
            if amp > 0.0 && amp <= amp_max {
                out.push((w_star, amp));
            }
        }
        w_prev = w;
        im_prev = im;
    }
    out
}

/// Fixed-step implicit Euler for `ẋ = Ax − γ·(0,0,1)·sat(x3/ε)`.
///
/// The saturation makes each step a piecewise-linear equation in `x3`,
/// solved exactly.
pub struct RegularizedSim {
    m: Matrix3<f64>,
    mb: Vector3<f64>,
    eps: f64,
    h: f64,
}

impl RegularizedSim {
    pub fn new(a: f64, b: f64, c: f64, gamma: f64, eps: f64, h: f64) -> Self {
        let m = (Matrix3::identity() - h * companion(a, b, c))
            .try_inverse()
            .expect("I − hA is invertible for small h");
        let mb = m * Vector3::new(0.0, 0.0, gamma);
        Self { m, mb, eps, h }
    }

    pub fn step(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let r = self.m * x;
        let (h, m3, eps) = (self.h, self.mb[2], self.eps);
        let s = if (r[2] - h * m3) / eps >= 1.0 {
            1.0
        } else if (r[2] + h * m3) / eps <= -1.0 {
            -1.0
        } else {
            r[2] / (eps + h * m3)
        };
        r - h * s * self.mb
    }

    /// Integrates from `x0` over `n_steps`, calling `visit(k, x)` for every step.
    pub fn run(&self, x0: Vector3<f64>, n_steps: usize, mut visit: impl FnMut(usize, &Vector3<f64>)) -> Vector3<f64> {
        let mut x = x0;
        visit(0, &x);
        for k in 1..=n_steps {
            x = self.step(&x);
            visit(k, &x);
        }
        x
    }

    /// Largest `|x2 − x2_ref|` over `samples = [(t, x2_ref)]`, each compared at
    /// the nearest step of the regularized run started from `x0` at `t = 0`.
    pub fn sup_x2_deviation(&self, x0: Vector3<f64>, samples: &[(f64, f64)]) -> f64 {
        let mut x = x0;
        let mut k = 0usize;
        let mut worst = 0.0f64;
        for &(t, x2) in samples {
            let target = (t / self.h).round() as usize;
            while k < target {
                x = self.step(&x);
                k += 1;
            }
            worst = worst.max((x[1] - x2).abs());
        }
        worst
    }
}
