//! Closed-form roots of monic real cubics `s³ + p2·s² + p1·s + p0`.
//!
//! Trigonometric form when the discriminant says three distinct real roots,
//! Cardano plus deflation otherwise. Every real root gets one Newton step,
//! kept only when it lowers the residual.

use std::f64::consts::PI;

/// Roots of a monic cubic with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubicRoots {
    /// Three real roots in ascending order (may contain repeats).
    ThreeReal([f64; 3]),
    /// One real root and the pair `re ± j·im` with `im > 0`.
    RealAndPair { real: f64, re: f64, im: f64 },
}

fn eval(p2: f64, p1: f64, p0: f64, s: f64) -> f64 {
    ((s + p2) * s + p1) * s + p0
}

fn polish(p2: f64, p1: f64, p0: f64, s: f64) -> f64 {
    let f = eval(p2, p1, p0, s);
    let df = (3.0 * s + 2.0 * p2) * s + p1;
    if df == 0.0 || !df.is_finite() {
        return s;
    }
    let next = s - f / df;
    if next.is_finite() && eval(p2, p1, p0, next).abs() < f.abs() {
        next
    } else {
        s
    }
}

/// Solves `s³ + p2·s² + p1·s + p0 = 0`.
pub fn solve_monic_cubic(p2: f64, p1: f64, p0: f64) -> CubicRoots {
    let shift = p2 / 3.0;
    // depressed cubic u³ + p·u + q with s = u − p2/3
    let p = p1 - p2 * p2 / 3.0;
    let q = 2.0 * p2 * p2 * p2 / 27.0 - p2 * p1 / 3.0 + p0;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if disc < 0.0 {
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos();
        let mut roots = [0.0; 3];
        for (k, root) in roots.iter_mut().enumerate() {
            let u = 2.0 * r * ((phi - 2.0 * PI * k as f64) / 3.0).cos();
            *root = polish(p2, p1, p0, u - shift);
        }
        roots.sort_by(f64::total_cmp);
        return CubicRoots::ThreeReal(roots);
    }

    // One real root via Cardano, choosing the sign that avoids cancellation.
    let sq = disc.sqrt();
    let w = (-half_q - half_q.signum() * sq).cbrt();
    let u = if w == 0.0 { 0.0 } else { w - third_p / w };
    let real = polish(p2, p1, p0, u - shift);

    // Deflate: s² + e1·s + e0 with e0 = −p0/real when well conditioned.
    let e1 = p2 + real;
    let e0 = if real.abs() > 1e-8 * (1.0 + p2.abs()) {
        -p0 / real
    } else {
        p1 + real * e1
    };
    let centre = -0.5 * e1;
    let d2 = centre * centre - e0;
    if d2 < 0.0 {
        CubicRoots::RealAndPair {
            real,
            re: centre,
            im: (-d2).sqrt(),
        }
    } else {
        let sd = d2.sqrt();
        // avoid cancellation between centre and sd
        let big = if centre >= 0.0 { centre + sd } else { centre - sd };
        let small = if big != 0.0 { e0 / big } else { 0.0 };
        let mut roots = [real, polish(p2, p1, p0, big), polish(p2, p1, p0, small)];
        roots.sort_by(f64::total_cmp);
        CubicRoots::ThreeReal(roots)
    }
}
