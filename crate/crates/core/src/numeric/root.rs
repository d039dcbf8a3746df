//! Bracketed root finding: secant steps that stay inside the bracket, with a
//! bisection fallback whenever a step fails to halve it.

use crate::error::{Error, Result};

/// Find a root of `f` in `[a, b]` to within `tol` in the argument.
///
/// Requires `f(a)` and `f(b)` to have opposite signs (or one of them to vanish).
pub fn bisect_secant<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket { a: lo, b: hi });
    }

    for _ in 0..200 {
        let width = hi - lo;
        if width <= tol {
            break;
        }
        let secant = if f_lo.is_finite() && f_hi.is_finite() {
            hi - f_hi * (hi - lo) / (f_hi - f_lo)
        } else {
            f64::NAN
        };
        // Accept the secant point only when it sits well inside the bracket.
        let margin = 0.05 * width;
        let mut x = if secant.is_finite() && secant > lo + margin && secant < hi - margin {
            secant
        } else {
            0.5 * (lo + hi)
        };
        if x <= lo || x >= hi {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        // Guarantee geometric shrinkage: if the secant barely moved the far
        // end, spend one bisection on it.
        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == f_lo.signum() {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
        }
    }

    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}

/// All roots of `f` on `[a, b]` detected by a sign-change scan over `scan`
/// equal subintervals, each refined with [`bisect_secant`].
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, scan: usize, tol: f64) -> Vec<f64> {
    let scan = scan.max(1);
    let h = (b - a) / scan as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(x0);
    for i in 1..=scan {
        let x1 = if i == scan { b } else { a + h * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.is_finite() && f1.is_finite() && f1 != 0.0 && f0.signum() != f1.signum() {
            if let Ok(r) = bisect_secant(&f, x0, x1, tol) {
                roots.push(r);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots
}
