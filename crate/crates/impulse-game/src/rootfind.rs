//! Bracketed scalar root finding and sign-change root isolation.
//!
//! Bisection with a secant acceleration step when the secant point falls
//! safely inside the bracket. Guaranteed convergence, no derivatives, and
//! deterministic results for fixed inputs.

use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_SCAN_GRID: usize = 4096;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("root not converged after {MAX_ITERATIONS} iterations (bracket [{lo}, {hi}])")]
    MaxIterations { lo: f64, hi: f64 },
}

/// An interval with a sign change: `f_lo * f_hi < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Bracket, RootError> {
        if !(lo < hi) || !(f_lo * f_hi < 0.0) {
            return Err(RootError::NoSignChange { lo, hi, f_lo, f_hi });
        }
        Ok(Bracket { lo, hi, f_lo, f_hi })
    }

    /// Evaluates `f` at both endpoints and checks for a sign change.
    pub fn from_fn(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Bracket, RootError> {
        Bracket::new(lo, hi, f(lo), f(hi))
    }
}

/// Finds the root inside `bracket`.
///
/// Stops when `f` hits exactly zero or the bracket width shrinks below
/// `tol * max(1, |x|)`. Secant steps alternate with forced bisections so
/// the width provably halves every other iteration.
pub fn find_root(f: impl Fn(f64) -> f64, bracket: &Bracket, tol: f64) -> Result<f64, RootError> {
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = *bracket;

    for iteration in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        // Secant candidate on odd iterations, accepted only strictly
        // interior; even iterations bisect unconditionally.
        let mut x = mid;
        let denom = f_hi - f_lo;
        if iteration % 2 == 1 && denom != 0.0 {
            let sec = hi - f_hi * (hi - lo) / denom;
            let margin = 1e-3 * (hi - lo);
            if sec > lo + margin && sec < hi - margin {
                x = sec;
            }
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx * f_lo < 0.0 {
            hi = x;
            f_hi = fx;
        } else {
            lo = x;
            f_lo = fx;
        }
        if hi - lo <= tol * x.abs().max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(RootError::MaxIterations { lo, hi })
}

/// Scans an `n_grid`-point uniform mesh on `[lo, hi]`, refines every
/// sign-change cell with [`find_root`], and returns the ascending,
/// deduplicated roots. Roots closer than `1e-8 * max(1, |root|)` merge.
pub fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n_grid: usize, tol: f64) -> Vec<f64> {
    assert!(lo < hi && n_grid >= 2, "scan_roots: need lo < hi, n_grid >= 2");
    let step = (hi - lo) / (n_grid - 1) as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..n_grid {
        let x = if i == n_grid - 1 { hi } else { lo + i as f64 * step };
        let fx = f(x);
        if f_prev == 0.0 {
            push_dedup(&mut roots, x_prev);
        } else if fx != 0.0 && f_prev * fx < 0.0 {
            let bracket = Bracket {
                lo: x_prev,
                hi: x,
                f_lo: f_prev,
                f_hi: fx,
            };
            if let Ok(root) = find_root(&f, &bracket, tol) {
                push_dedup(&mut roots, root);
            }
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        push_dedup(&mut roots, x_prev);
    }
    roots
}

fn push_dedup(roots: &mut Vec<f64>, root: f64) {
    if let Some(&last) = roots.last() {
        if (root - last).abs() <= 1e-8 * root.abs().max(1.0) {
            return;
        }
    }
    roots.push(root);
}
