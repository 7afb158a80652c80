//! Type-I equilibrium: the controller's post-impulse target lies strictly
//! inside both continuation regions, so the players never act at the same
//! instant.
//!
//! The seven smooth-pasting equations reduce, after the substitutions
//! `z = e^{theta(x1* - x1_bar)}` and `w = e^{theta(x2_bar - x1_bar)}`, to a
//! scalar transcendental equation for `z` and a quartic polynomial for `w`.
//! Thresholds and ODE coefficients then follow in closed form.

use crate::model::{phi1_second, GameParams, OdeCoefficients};
use crate::rootfind::{self, Bracket, RootError};
use thiserror::Error;

/// Tolerance on the closed side of the equilibrium inequalities; float
/// noise at an equality boundary must not reject a valid candidate.
pub const CONDITION_SLACK: f64 = 1e-9;

/// Search bounds and tolerances shared by both solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub n_grid: usize,
    /// Upper bound for the `z` bracket.
    pub z_max: f64,
    /// Upper bound for the `w` scan. `w = e^{theta * width}`, so widths
    /// beyond `ln(w_max)/theta` are out of reach by construction.
    pub w_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: rootfind::DEFAULT_TOL,
            n_grid: rootfind::DEFAULT_SCAN_GRID,
            z_max: 1e6,
            w_max: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Type1Error {
    #[error("F has no root on (1, {z_max}]: F({z_max}) = {f_at_max} < 0; the bracket bound is too small")]
    FRootNotBracketed { z_max: f64, f_at_max: f64 },
    #[error("root refinement failed: {0}")]
    Root(#[from] RootError),
    #[error("the quartic has no root above z = {z_tilde} up to w = {w_max}")]
    NoQuarticRoot { z_tilde: f64, w_max: f64 },
    #[error("no quartic root passes the equilibrium conditions; rejected candidates: {}",
        .candidates.iter().map(|c| format!("w = {} ({})", c.w, c.conditions.failed_names().join(", ")))
        .collect::<Vec<_>>().join("; "))]
    AllCandidatesRejected { candidates: Vec<Type1Candidate> },
}

/// Condition flags of a Type-I candidate, with the evaluated sides kept
/// for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type1Conditions {
    pub ne11_ok: bool,
    pub ne12_ok: bool,
    pub order_ok: bool,
    pub second_order_ok: bool,
    /// The middle expression of the two-sided inequality; must lie in
    /// `[0, ne11_bound)`.
    pub ne11_value: f64,
    pub ne11_bound: f64,
    /// Must be strictly positive.
    pub ne12_value: f64,
    /// `phi1''(x1*)`; must be nonpositive.
    pub second_order_value: f64,
}

impl Type1Conditions {
    pub fn all_ok(&self) -> bool {
        self.ne11_ok && self.ne12_ok && self.order_ok && self.second_order_ok
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.ne11_ok {
            out.push("NE11");
        }
        if !self.ne12_ok {
            out.push("NE12");
        }
        if !self.order_ok {
            out.push("order");
        }
        if !self.second_order_ok {
            out.push("second-order");
        }
        out
    }
}

/// A fully resolved Type-I equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct Type1Equilibrium {
    pub z_tilde: f64,
    pub w_tilde: f64,
    pub x1_bar: f64,
    pub x1_star: f64,
    pub x2_bar: f64,
    pub coeffs: OdeCoefficients,
    pub conditions: Type1Conditions,
}

/// One root of the quartic with its derived thresholds and condition flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Type1Candidate {
    pub w: f64,
    pub x1_bar: f64,
    pub x1_star: f64,
    pub x2_bar: f64,
    pub coeffs: OdeCoefficients,
    pub conditions: Type1Conditions,
}

/// `F(z) = ln z - 2(z-1)/(z+1) - c*r*theta/(1 - lambda*r)`; strictly
/// increasing on `(1, inf)` with `F(1) < 0`.
pub fn f_of_z(z: f64, p: &GameParams) -> f64 {
    z.ln() - 2.0 * (z - 1.0) / (z + 1.0) - p.c() * p.r() * p.theta() / (1.0 - p.lambda() * p.r())
}

/// The unique root of `F` above 1.
pub fn solve_f(p: &GameParams) -> Result<f64, Type1Error> {
    solve_f_with(p, &SolverOptions::default())
}

pub fn solve_f_with(p: &GameParams, opts: &SolverOptions) -> Result<f64, Type1Error> {
    let lo = 1.0 + 1e-9;
    let f_at_max = f_of_z(opts.z_max, p);
    if f_at_max < 0.0 {
        return Err(Type1Error::FRootNotBracketed {
            z_max: opts.z_max,
            f_at_max,
        });
    }
    let bracket = Bracket::from_fn(|z| f_of_z(z, p), lo, opts.z_max)?;
    Ok(find_root_checked(|z| f_of_z(z, p), &bracket, opts.tol)?)
}

fn find_root_checked(
    f: impl Fn(f64) -> f64,
    bracket: &Bracket,
    tol: f64,
) -> Result<f64, RootError> {
    rootfind::find_root(f, bracket, tol)
}

/// The quartic in `w`, expanded form. Kept term-by-term as a polynomial in
/// `w` with coefficients built from `(z, theta, a, b, lambda, gamma, r, s,
/// q, c, d)`.
pub fn quartic_in_w(w: f64, z_tilde: f64, p: &GameParams) -> f64 {
    let (r, th) = (p.r(), p.theta());
    let (a, b, lam, gam) = (p.a(), p.b(), p.lambda(), p.gamma());
    let (s, q, d) = (p.s(), p.q(), p.d());
    let z = z_tilde;
    let lead = (1.0 - b * r) * (1.0 - lam * r) / (th * (1.0 - a * r) * (z + 1.0));
    lead * w.powi(4)
        + w.powi(3) * ((1.0 - b * r) * (s / (1.0 - a * r) - 1.0 / th) - q)
        + 2.0 * z
            * w
            * w
            * (((1.0 - gam * r) / th * z.ln() - r * d) / (z - 1.0) - lead)
        + z * w * (q - (1.0 - b * r) * (s / (1.0 - a * r) + 1.0 / th))
        + lead * z * z
}

/// The same equation before expansion: the pasting relation for P2 at the
/// lower threshold with the threshold `x2_bar` substituted in, rescaled by
/// `2 r z w / (z - 1)` so it matches [`quartic_in_w`] identically.
pub fn w_equation_unexpanded(w: f64, z_tilde: f64, p: &GameParams) -> f64 {
    let (r, th) = (p.r(), p.theta());
    let (b, gam, d, q) = (p.b(), p.gamma(), p.d(), p.q());
    let z = z_tilde;
    let x2 = x2_bar_type1(z, w, p);
    let upper = (1.0 - b * r) * (x2 + 1.0 / th) - q;
    let lower = (1.0 - b * r) * (x2 - 1.0 / th) - q;
    let raw =
        -z * upper + w * w * lower + 2.0 * z * w / (z - 1.0) * ((1.0 - gam * r) / th * z.ln() - r * d);
    // one more factor of w clears the 1/w left by substituting x2_bar
    raw * w
}

/// Upper threshold from the linear pasting relation:
/// `x2_bar = [ (1-lambda r)/(theta w) * (w^2 - z)/(z+1) + s ] / (1 - a r)`.
pub fn x2_bar_type1(z_tilde: f64, w_tilde: f64, p: &GameParams) -> f64 {
    let (r, th) = (p.r(), p.theta());
    ((1.0 - p.lambda() * r) / (th * w_tilde) * (w_tilde * w_tilde - z_tilde) / (z_tilde + 1.0)
        + p.s())
        / (1.0 - p.a() * r)
}

/// ODE coefficients recovered from the thresholds.
pub fn coefficients_type1(x1_bar: f64, x1_star: f64, x2_bar: f64, p: &GameParams) -> OdeCoefficients {
    let (r, th) = (p.r(), p.theta());
    let denom = (th * x1_star).exp() + (th * x1_bar).exp();
    let c11 = -(1.0 - p.lambda() * r) / (r * th) / denom;
    let c12 = (1.0 - p.lambda() * r) / (r * th) * (th * (x1_star + x1_bar)).exp() / denom;
    let c21 = (-th * x2_bar).exp() / (2.0 * r) * ((1.0 - p.b() * r) * (x2_bar + 1.0 / th) - p.q());
    let c22 = (th * x2_bar).exp() / (2.0 * r) * ((1.0 - p.b() * r) * (x2_bar - 1.0 / th) - p.q());
    OdeCoefficients { c11, c12, c21, c22 }
}

fn thresholds_from(z: f64, w: f64, p: &GameParams) -> (f64, f64, f64) {
    let th = p.theta();
    let x2_bar = x2_bar_type1(z, w, p);
    let x1_star = x2_bar + (z.ln() - w.ln()) / th;
    let x1_bar = x2_bar - w.ln() / th;
    (x1_bar, x1_star, x2_bar)
}

/// Evaluates the equilibrium inequalities and the ordering for a candidate
/// pair `(z, w)`.
pub fn check_conditions_type1(z_tilde: f64, w_tilde: f64, p: &GameParams) -> Type1Conditions {
    let (r, th) = (p.r(), p.theta());
    let (a, b, lam, s, q) = (p.a(), p.b(), p.lambda(), p.s(), p.q());
    let (z, w) = (z_tilde, w_tilde);

    let ne11_value = (1.0 - b * r) * (1.0 - lam * r) * (w * w - z)
        / (th * w * (1.0 - a * r) * (z + 1.0))
        + (1.0 - b * r) * s / (1.0 - a * r)
        - q;
    let ne11_bound = (1.0 - b * r) / th;
    let ne11_ok = ne11_value >= -CONDITION_SLACK * ne11_bound.max(1.0) && ne11_value < ne11_bound;

    let ne12_value = ((1.0 - b * r) / (1.0 - a * r)
        * ((1.0 - lam * r) * (w * w - z) / (th * w * (z + 1.0)) + s)
        - q)
        * (w - 1.0)
        * (w - 1.0)
        + (1.0 - b * r) / th * (1.0 + 2.0 * w * w.ln() - w * w);
    let ne12_ok = ne12_value > 0.0;

    let order_ok = 1.0 < z && z < w;

    let (x1_bar, x1_star, x2_bar) = thresholds_from(z, w, p);
    let coeffs = coefficients_type1(x1_bar, x1_star, x2_bar, p);
    let second_order_value = phi1_second(x1_star, &coeffs, p);
    let scale = (1.0 - lam * r) / r; // magnitude of the phi1 slope scale
    let second_order_ok = second_order_value <= CONDITION_SLACK * scale;

    Type1Conditions {
        ne11_ok,
        ne12_ok,
        order_ok,
        second_order_ok,
        ne11_value,
        ne11_bound,
        ne12_value,
        second_order_value,
    }
}

/// All quartic roots above `z_tilde`, each with thresholds, coefficients
/// and condition flags, in ascending `w` order.
pub fn type1_candidates(p: &GameParams, opts: &SolverOptions) -> Result<(f64, Vec<Type1Candidate>), Type1Error> {
    let z = solve_f_with(p, opts)?;
    // Scan in log(w): the quartic roots of interest sit a few grid cells
    // above z while the search range extends to w_max.
    let lo = (z * (1.0 + 1e-9)).ln();
    let hi = opts.w_max.ln();
    let roots = rootfind::scan_roots(
        |u| quartic_in_w(u.exp(), z, p),
        lo,
        hi,
        opts.n_grid,
        opts.tol,
    );
    let candidates: Vec<Type1Candidate> = roots
        .into_iter()
        .map(|u| u.exp())
        .map(|w| {
            let (x1_bar, x1_star, x2_bar) = thresholds_from(z, w, p);
            Type1Candidate {
                w,
                x1_bar,
                x1_star,
                x2_bar,
                coeffs: coefficients_type1(x1_bar, x1_star, x2_bar, p),
                conditions: check_conditions_type1(z, w, p),
            }
        })
        .collect();
    if candidates.is_empty() {
        return Err(Type1Error::NoQuarticRoot {
            z_tilde: z,
            w_max: opts.w_max,
        });
    }
    Ok((z, candidates))
}

/// Full pipeline: solve for `z`, isolate the quartic roots, and return the
/// smallest candidate `w` passing every condition.
pub fn solve_type1(p: &GameParams) -> Result<Type1Equilibrium, Type1Error> {
    solve_type1_with(p, &SolverOptions::default())
}

pub fn solve_type1_with(p: &GameParams, opts: &SolverOptions) -> Result<Type1Equilibrium, Type1Error> {
    let (z, candidates) = type1_candidates(p, opts)?;
    for cand in &candidates {
        if cand.conditions.all_ok() {
            return Ok(Type1Equilibrium {
                z_tilde: z,
                w_tilde: cand.w,
                x1_bar: cand.x1_bar,
                x1_star: cand.x1_star,
                x2_bar: cand.x2_bar,
                coeffs: cand.coeffs,
                conditions: cand.conditions,
            });
        }
    }
    Err(Type1Error::AllCandidatesRejected { candidates })
}
