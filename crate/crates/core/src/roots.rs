//! Bracketed scalar root finding: bisection with secant acceleration.
//!
//! The solvers in this crate always construct a sign-changing bracket first
//! (thresholds live between known distribution quantiles), so a guarded
//! bracket shrinker is all that is needed. Secant steps give superlinear
//! convergence on the smooth monotone functions we solve; a forced bisection
//! whenever the bracket fails to halve keeps the worst case linear.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop when |f| drops below this.
    pub f_tol: f64,
    /// Stop when the bracket width drops below x_tol * (1 + |x|).
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-12,
            x_tol: 1e-13,
            max_iter: 200,
        }
    }
}

/// Find x in [lo, hi] with f(x) = 0, requiring f(lo) and f(hi) to have
/// opposite signs. `f` may itself fail (quadrature-backed objectives).
pub fn solve_bracketed<F>(mut f: F, lo: f64, hi: f64, opts: &RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 || fa.abs() <= opts.f_tol {
        return Ok(a);
    }
    if fb == 0.0 || fb.abs() <= opts.f_tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketSign {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut width_at_last_check = b - a;
    for iter in 0..opts.max_iter {
        let width = b - a;
        let scale = 1.0 + a.abs().max(b.abs());
        if width <= opts.x_tol * scale {
            // midpoint of the final bracket
            return Ok(0.5 * (a + b));
        }

        // secant step from the bracket endpoints, with bisection fallback
        let mut x = a - fa * (b - a) / (fb - fa);
        let margin = 0.01 * width;
        let force_bisect = iter % 3 == 2 && width > 0.5 * width_at_last_check;
        if force_bisect || !x.is_finite() || x <= a + margin.min(width * 0.5) || x >= b - margin.min(width * 0.5) {
            x = 0.5 * (a + b);
        }
        if iter % 3 == 2 {
            width_at_last_check = width;
        }

        let fx = f(x)?;
        if fx == 0.0 || fx.abs() <= opts.f_tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Err(Error::RootIterations {
        max_iter: opts.max_iter,
        width: b - a,
    })
}
