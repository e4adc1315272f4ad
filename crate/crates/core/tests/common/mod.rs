//! One-dimensional quadrature for `P(e^Y0 + e^Y1 <= t)` with independent
//! standard normal `Y0`, `Y1`, using only `libm` and bisection.

#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Root of an increasing `g` on `[lo, hi]` with `g(lo) < 0 < g(hi)`.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`, started on
/// `panels` equal pieces.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let f = &f as &dyn Fn(f64) -> f64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, if i + 1 == panels { b } else { a + (i + 1) as f64 * h });
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 50)
        })
        .sum()
}

/// `integral of Phi(xi(y1)) rho(y1)` over `{e^y1 < t}`, where `xi` solves
/// `e^xi + e^y1 = t` by bisection.
pub fn two_lognormal_cdf(t: f64) -> f64 {
    let top = bisect(|y| y.exp() - t, -60.0, 60.0);
    let integrand = |y1: f64| {
        let rest = y1.exp();
        if rest >= t {
            return 0.0;
        }
        let xi = bisect(|y0| y0.exp() + rest - t, -800.0, 60.0);
        normal_cdf(xi) * normal_pdf(y1)
    };
    adaptive_simpson(integrand, -40.0, top, 200, 1e-15)
}

/// Central difference of [`two_lognormal_cdf`].
pub fn two_lognormal_pdf(t: f64, h: f64) -> f64 {
    (two_lognormal_cdf(t + h) - two_lognormal_cdf(t - h)) / (2.0 * h)
}
