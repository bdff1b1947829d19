//! Safeguarded scalar root finding for increasing-through-zero functions.

use crate::error::{Error, Result};

/// Finds a root of `f` inside `[lo, hi]` where `f(lo) < 0 < f(hi)`.
///
/// `f` returns the value and derivative. Newton steps are taken when they
/// stay inside the current bracket and shrink it fast enough, bisection
/// otherwise. Terminates when the step is below `rel_tol * |x|`.
pub(crate) fn newton_bisect<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    const MAX_ITER: usize = 300;
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton_ok = dfx > 0.0 && {
            let xn = x - fx / dfx;
            xn > lo && xn < hi && (2.0 * fx).abs() <= (dx_old * dfx).abs()
        };
        dx_old = dx;
        if newton_ok {
            dx = fx / dfx;
            x -= dx;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        if dx.abs() <= rel_tol * x.abs() || hi - lo <= 4.0 * f64::EPSILON * hi.abs() || hi - lo < f64::MIN_POSITIVE {
            return Ok(x);
        }
        (fx, dfx) = f(x);
    }
    Err(Error::Convergence(format!(
        "scalar root finder did not converge in {MAX_ITER} iterations (bracket [{lo:e}, {hi:e}])"
    )))
}

/// Doubles `hi` starting from `start` until `f(hi) > 0`; fails after
/// `hi` exceeds `limit`.
pub(crate) fn grow_upper<F: Fn(f64) -> f64>(f: F, start: f64, limit: f64) -> Result<f64> {
    let mut hi = start;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if hi > limit || !hi.is_finite() {
            return Err(Error::Convergence(format!(
                "bracket growth exceeded {limit:e}"
            )));
        }
    }
    Ok(hi)
}
