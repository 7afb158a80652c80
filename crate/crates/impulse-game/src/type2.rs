//! Type-II equilibrium: the controller's impulse lands exactly on the
//! stopper's boundary, forcing the game to end at the same instant.
//!
//! With the target pinned to the upper threshold (`x1* = x2_bar`, the only
//! interesting case given `a < lambda`), the six pasting equations reduce to
//! a single scalar equation `G(w) = 0` in `w = e^{theta(x2_bar - x1_bar)}`:
//! the two closed-form expressions for the upper threshold must agree.

use crate::model::{GameParams, OdeCoefficients};
use crate::rootfind::{self, RootError};
use crate::type1::{SolverOptions, CONDITION_SLACK};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Type2Error {
    #[error("G has no root on (1, {w_max}); the scan bound may be too small")]
    EmptyRootSet { w_max: f64 },
    #[error("root refinement failed: {0}")]
    Root(#[from] RootError),
    #[error("the two threshold expressions disagree at w = {w}: {x2_first} vs {x2_second}; not a root of G")]
    InconsistentX2 { w: f64, x2_first: f64, x2_second: f64 },
    #[error("no G-root passes the equilibrium conditions; rejected candidates: {}",
        .candidates.iter().map(|c| format!("w = {} ({})", c.w, c.conditions.failed_names().join(", ")))
        .collect::<Vec<_>>().join("; "))]
    AllCandidatesRejected { candidates: Vec<Type2Candidate> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type2Conditions {
    pub ne21_ok: bool,
    pub ne22_ok: bool,
    /// Left side of the strict inequality; must be positive.
    pub ne21_value: f64,
    /// Middle expression of the two-sided inequality; must lie in
    /// `[0, ne22_bound)`.
    pub ne22_value: f64,
    pub ne22_bound: f64,
}

impl Type2Conditions {
    pub fn all_ok(&self) -> bool {
        self.ne21_ok && self.ne22_ok
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.ne21_ok {
            out.push("NE21");
        }
        if !self.ne22_ok {
            out.push("NE22");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Type2Equilibrium {
    pub w_hat: f64,
    pub x1_bar: f64,
    pub x2_bar: f64,
    pub coeffs: OdeCoefficients,
    pub conditions: Type2Conditions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Type2Candidate {
    pub w: f64,
    pub x1_bar: f64,
    pub x2_bar: f64,
    pub coeffs: OdeCoefficients,
    pub conditions: Type2Conditions,
}

/// Upper threshold from P1's pasting equations.
pub fn x2_bar_first(w: f64, p: &GameParams) -> f64 {
    let (r, th) = (p.r(), p.theta());
    let lnw = w.ln();
    ((1.0 - p.lambda() * r) * ((lnw - 1.0) * w * w + lnw + 1.0)
        - p.c() * r * th * (w * w + 1.0))
        / (th * (1.0 - p.a() * r) * (w - 1.0) * (w - 1.0))
        + p.s() / (1.0 - p.a() * r)
}

/// Upper threshold from P2's pasting equations.
pub fn x2_bar_second(w: f64, p: &GameParams) -> f64 {
    let (r, th) = (p.r(), p.theta());
    let lnw = w.ln();
    p.q() / (1.0 - p.b() * r)
        + (w + 1.0) / (th * (w - 1.0))
        + 2.0 * (th * r * p.d() - (1.0 - p.gamma() * r) * lnw) * w
            / (th * (1.0 - p.b() * r) * (w - 1.0) * (w - 1.0))
}

/// `G(w)`: difference of the two threshold expressions. Tends to -inf as
/// `w -> 1+` and to +inf as `w -> inf`, so a root above 1 always exists.
pub fn g_of_w(w: f64, p: &GameParams) -> f64 {
    x2_bar_first(w, p) - x2_bar_second(w, p)
}

/// All roots of `G` on `(1, w_max)`, ascending.
pub fn solve_g(p: &GameParams) -> Result<Vec<f64>, Type2Error> {
    solve_g_with(p, &SolverOptions::default())
}

pub fn solve_g_with(p: &GameParams, opts: &SolverOptions) -> Result<Vec<f64>, Type2Error> {
    // log-space scan: G blows up near w = 1, roots sit at moderate w.
    let lo = 1e-6f64.ln_1p(); // ln(1 + 1e-6)
    let hi = opts.w_max.ln();
    let roots = rootfind::scan_roots(|u| g_of_w(u.exp(), p), lo, hi, opts.n_grid, opts.tol);
    if roots.is_empty() {
        return Err(Type2Error::EmptyRootSet { w_max: opts.w_max });
    }
    Ok(roots.into_iter().map(|u| u.exp()).collect())
}

/// Thresholds for a root `w_hat`; cross-checks the two closed forms.
pub fn thresholds_type2(w_hat: f64, p: &GameParams) -> Result<(f64, f64), Type2Error> {
    let x2_first = x2_bar_first(w_hat, p);
    let x2_second = x2_bar_second(w_hat, p);
    let scale = x2_first.abs().max(x2_second.abs()).max(1.0);
    if (x2_first - x2_second).abs() > 1e-6 * scale {
        return Err(Type2Error::InconsistentX2 {
            w: w_hat,
            x2_first,
            x2_second,
        });
    }
    let x2_bar = x2_second;
    let x1_bar = x2_bar - w_hat.ln() / p.theta();
    Ok((x1_bar, x2_bar))
}

/// ODE coefficients from the two thresholds.
pub fn coefficients_type2(x1_bar: f64, x2_bar: f64, p: &GameParams) -> OdeCoefficients {
    let (r, th) = (p.r(), p.theta());
    let slope_gap = (p.a() - p.lambda()) * x2_bar - p.c() + p.s() / r;
    let c11 = (-th * x1_bar).exp() / 2.0
        * (slope_gap - (x1_bar + 1.0 / th) * (1.0 - p.lambda() * r) / r);
    let c12 = (th * x1_bar).exp() / 2.0
        * (slope_gap - (x1_bar - 1.0 / th) * (1.0 - p.lambda() * r) / r);
    let c21 = (-th * x2_bar).exp() / (2.0 * r) * ((1.0 - p.b() * r) * (x2_bar + 1.0 / th) - p.q());
    let c22 = (th * x2_bar).exp() / (2.0 * r) * ((1.0 - p.b() * r) * (x2_bar - 1.0 / th) - p.q());
    OdeCoefficients { c11, c12, c21, c22 }
}

pub fn check_conditions_type2(w_hat: f64, p: &GameParams) -> Type2Conditions {
    let (r, th) = (p.r(), p.theta());
    let w = w_hat;
    let ne21_value = (1.0 - p.lambda() * r) * (w - w * w.ln() - 1.0) + p.c() * r * th * w;
    let ne21_ok = ne21_value > 0.0;
    let ne22_value = (1.0 - p.b() * r) * (w * w - 1.0)
        + 2.0 * (th * r * p.d() - (1.0 - p.gamma() * r) * w.ln()) * w;
    let ne22_bound = (1.0 - p.b() * r) * (w - 1.0) * (w - 1.0);
    let ne22_ok = ne22_value >= -CONDITION_SLACK * ne22_bound.max(1.0) && ne22_value < ne22_bound;
    Type2Conditions {
        ne21_ok,
        ne22_ok,
        ne21_value,
        ne22_value,
        ne22_bound,
    }
}

/// Every root of `G` with its derived quantities, ascending in `w`.
pub fn type2_candidates(p: &GameParams, opts: &SolverOptions) -> Result<Vec<Type2Candidate>, Type2Error> {
    let roots = solve_g_with(p, opts)?;
    let mut out = Vec::with_capacity(roots.len());
    for w in roots {
        let (x1_bar, x2_bar) = thresholds_type2(w, p)?;
        out.push(Type2Candidate {
            w,
            x1_bar,
            x2_bar,
            coeffs: coefficients_type2(x1_bar, x2_bar, p),
            conditions: check_conditions_type2(w, p),
        });
    }
    Ok(out)
}

/// Full pipeline: smallest root of `G` passing both equilibrium
/// inequalities, or a structured rejection.
pub fn solve_type2(p: &GameParams) -> Result<Type2Equilibrium, Type2Error> {
    solve_type2_with(p, &SolverOptions::default())
}

pub fn solve_type2_with(p: &GameParams, opts: &SolverOptions) -> Result<Type2Equilibrium, Type2Error> {
    let candidates = type2_candidates(p, opts)?;
    for cand in &candidates {
        if cand.conditions.all_ok() {
            return Ok(Type2Equilibrium {
                w_hat: cand.w,
                x1_bar: cand.x1_bar,
                x2_bar: cand.x2_bar,
                coeffs: cand.coeffs,
                conditions: cand.conditions,
            });
        }
    }
    Err(Type2Error::AllCandidatesRejected { candidates })
}
