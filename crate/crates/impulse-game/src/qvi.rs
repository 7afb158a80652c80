//! Grid-based certification of a candidate equilibrium: the six QVI
//! conditions, the smooth-pasting residuals, and the scalar inequalities
//! that the verification argument reduces to.

use rayon::prelude::*;

use crate::payoffs::{EquilibriumKind, PiecewisePayoff, Region};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    /// Three region-widths of margin on either side of the thresholds,
    /// covering both linear tails.
    pub fn default_for(pp: &PiecewisePayoff) -> GridSpec {
        let width = pp.x2_bar() - pp.x1_bar();
        GridSpec {
            lo: pp.x1_bar() - 3.0 * width,
            hi: pp.x2_bar() + 3.0 * width,
            n: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRecord {
    pub id: &'static str,
    pub region: &'static str,
    pub max_violation: f64,
    pub argmax: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QviReport {
    pub records: Vec<ConditionRecord>,
    pub grid: GridSpec,
    pub tol_analytic: f64,
    pub tol_fd: f64,
}

impl QviReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.records.iter().filter(|r| !r.pass).map(|r| r.id).collect()
    }

    /// Flat `key = value` rendering, one block per condition.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("pass = {}\n", self.pass()));
        out.push_str(&format!("grid.lo = {}\n", self.grid.lo));
        out.push_str(&format!("grid.hi = {}\n", self.grid.hi));
        out.push_str(&format!("grid.n = {}\n", self.grid.n));
        out.push_str(&format!("tol.analytic = {}\n", self.tol_analytic));
        out.push_str(&format!("tol.fd = {}\n", self.tol_fd));
        for r in &self.records {
            out.push_str(&format!("{}.region = {}\n", r.id, r.region));
            out.push_str(&format!("{}.max_violation = {:e}\n", r.id, r.max_violation));
            out.push_str(&format!("{}.argmax = {}\n", r.id, r.argmax));
            out.push_str(&format!("{}.pass = {}\n", r.id, r.pass));
        }
        out
    }

    /// One CSV row per condition.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,region,max_violation,argmax,pass\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.id, r.region, r.max_violation, r.argmax, r.pass
            ));
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum QviError {
    #[error("grid too coarse: n = {0}, need at least 100 points")]
    GridTooCoarse(usize),
}

pub const DEFAULT_TOL_ANALYTIC: f64 = 1e-7;
pub const DEFAULT_TOL_FD: f64 = 1e-4;

/// Width (relative to the region width) of the window around each
/// threshold excluded from second-derivative checks: W is only C¹ there.
const THRESHOLD_WINDOW: f64 = 1e-7;

fn max_over<F>(grid: &GridSpec, f: F) -> (f64, f64)
where
    F: Fn(f64) -> Option<f64> + Sync,
{
    let step = (grid.hi - grid.lo) / (grid.n - 1) as f64;
    (0..grid.n)
        .into_par_iter()
        .filter_map(|i| {
            let x = grid.lo + step * i as f64;
            f(x).map(|v| (v, x))
        })
        .reduce(
            || (f64::NEG_INFINITY, f64::NAN),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        )
}

/// Check the six QVI conditions plus pasting, regularity, and
/// finite-difference cross-checks on a grid.
pub fn verify(
    pp: &PiecewisePayoff,
    grid: GridSpec,
    tol_analytic: f64,
    tol_fd: f64,
) -> Result<QviReport, QviError> {
    if grid.n < 100 {
        return Err(QviError::GridTooCoarse(grid.n));
    }
    let p = *pp.params();
    let width = pp.x2_bar() - pp.x1_bar();
    let window = THRESHOLD_WINDOW * width.max(1.0);
    let near_threshold =
        |x: f64, w: f64| (x - pp.x1_bar()).abs() < w || (x - pp.x2_bar()).abs() < w;
    let mut records = Vec::new();
    let mut push = |id, region, (max_violation, argmax): (f64, f64), tol: f64| {
        records.push(ConditionRecord {
            id,
            region,
            max_violation,
            argmax,
            pass: max_violation <= tol,
        });
    };

    // (i) MW1 - W1 <= 0 everywhere
    push(
        "qvi1_mw1_le_w1",
        "all",
        max_over(&grid, |x| Some(pp.m_op(x) - pp.w1(x))),
        tol_analytic,
    );

    // (ii) W2 + b x >= 0 everywhere
    push(
        "qvi2_w2_obstacle",
        "all",
        max_over(&grid, |x| Some(-(pp.w2(x) + p.b() * x))),
        tol_analytic,
    );

    // (iii) HW2 = W2 on {MW1 = W1} = intervention region
    push(
        "qvi3_hw2_eq_w2",
        "intervention",
        max_over(&grid, |x| {
            (pp.region(x) == Region::Intervention).then(|| (pp.h_op(x) - pp.w2(x)).abs())
        }),
        tol_analytic,
    );

    // (iv) W1 = a x on {W2 = -b x} = stopping region
    push(
        "qvi4_w1_eq_ax",
        "stopping",
        max_over(&grid, |x| {
            (pp.region(x) == Region::Stopping).then(|| (pp.w1(x) - p.a() * x).abs())
        }),
        tol_analytic,
    );

    // (v) max{L W2 + q - x, -b x - W2} = 0 on {MW1 < W1}
    let lw2 = |x: f64| 0.5 * p.sigma() * p.sigma() * pp.w2_second(x) - p.r() * pp.w2(x) + p.q() - x;
    push(
        "qvi5_w2_hjb",
        "continuation+stopping",
        max_over(&grid, |x| {
            (pp.region(x) != Region::Intervention && !near_threshold(x, window))
                .then(|| lw2(x).max(-p.b() * x - pp.w2(x)).abs())
        }),
        tol_analytic,
    );

    // (vi) max{L W1 + x - s, MW1 - W1} = 0 on {W2 > -b x}
    let lw1 = |x: f64| 0.5 * p.sigma() * p.sigma() * pp.w1_second(x) - p.r() * pp.w1(x) + x - p.s();
    push(
        "qvi6_w1_hjb",
        "intervention+continuation",
        max_over(&grid, |x| {
            (pp.region(x) != Region::Stopping && !near_threshold(x, window))
                .then(|| lw1(x).max(pp.m_op(x) - pp.w1(x)).abs())
        }),
        tol_analytic,
    );

    // analytic vs central-difference second derivatives on open regions
    let h = 1e-4 * width.max(1.0);
    let fd_window = 2.0 * h + window;
    let fd2 = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    push(
        "fd_w1_second",
        "all",
        max_over(&grid, |x| {
            (!near_threshold(x, fd_window)).then(|| {
                let a = pp.w1_second(x);
                (fd2(&|y| pp.w1(y), x) - a).abs() / a.abs().max(1.0)
            })
        }),
        tol_fd,
    );
    push(
        "fd_w2_second",
        "all",
        max_over(&grid, |x| {
            (!near_threshold(x, fd_window)).then(|| {
                let a = pp.w2_second(x);
                (fd2(&|y| pp.w2(y), x) - a).abs() / a.abs().max(1.0)
            })
        }),
        tol_fd,
    );

    // smooth pasting; a pasting equation broken by >= 1e-3 must register
    for (id, residual) in pasting_report(pp) {
        records.push(ConditionRecord {
            id,
            region: "threshold",
            max_violation: residual.abs(),
            argmax: f64::NAN,
            pass: residual.abs() <= 1e-6,
        });
    }

    // scalar inequalities from the verification argument
    for (id, value, pass) in verification_inequalities(pp) {
        records.push(ConditionRecord {
            id,
            region: "threshold",
            max_violation: (-value).max(0.0),
            argmax: f64::NAN,
            pass,
        });
    }

    Ok(QviReport { records, grid, tol_analytic, tol_fd })
}

/// Verify on the default grid and tolerances.
pub fn verify_default(pp: &PiecewisePayoff) -> QviReport {
    verify(pp, GridSpec::default_for(pp), DEFAULT_TOL_ANALYTIC, DEFAULT_TOL_FD)
        .expect("default grid is fine enough")
}

/// Residuals of the value-matching and smooth-fit equations at the
/// thresholds: 7 for Type I, 6 for Type II.
pub fn pasting_report(pp: &PiecewisePayoff) -> Vec<(&'static str, f64)> {
    let p = pp.params();
    let (x1, xs, x2) = (pp.x1_bar(), pp.x1_star(), pp.x2_bar());
    // continuation-side values exactly at the thresholds
    let phi1 = |x: f64| pp.phi1_at(x);
    let phi2 = |x: f64| pp.phi2_at(x);
    let phi1p = |x: f64| pp.phi1_prime_at(x);
    let phi2p = |x: f64| pp.phi2_prime_at(x);
    let target1 = match pp.kind() {
        EquilibriumKind::TypeI => phi1(xs),
        EquilibriumKind::TypeII => p.a() * x2,
    };
    let target2 = match pp.kind() {
        EquilibriumKind::TypeI => phi2(xs),
        EquilibriumKind::TypeII => -p.b() * x2,
    };
    let mut out = vec![
        ("c0_w1_x1bar", phi1(x1) - (target1 - p.c() - p.lambda() * (xs - x1))),
        ("c1_w1_x1bar", phi1p(x1) - p.lambda()),
        ("c0_w2_x1bar", phi2(x1) - (target2 + p.d() + p.gamma() * (xs - x1))),
        ("c0_w1_x2bar", phi1(x2) - p.a() * x2),
        ("c0_w2_x2bar", phi2(x2) + p.b() * x2),
        ("c1_w2_x2bar", phi2p(x2) + p.b()),
    ];
    if pp.kind() == EquilibriumKind::TypeI {
        // optimality of the interior impulse target
        out.insert(2, ("c1_w1_x1star", phi1p(xs) - p.lambda()));
    }
    out
}

/// The scalar inequalities the equilibrium proofs reduce to.
pub fn verification_inequalities(pp: &PiecewisePayoff) -> Vec<(&'static str, f64, bool)> {
    let p = pp.params();
    let (x1, x2) = (pp.x1_bar(), pp.x2_bar());
    let e = 1e-9 * (x2 - x1);
    let slack = 1e-9;
    let mut out = Vec::new();
    let mut push = |id, value: f64, scale: f64| out.push((id, value, value >= -slack * scale));
    // running payoff of P2 stays nonpositive on the stopping set
    push("stop_q_le", (1.0 - p.b() * p.r()) * x2 - p.q(), x2.abs().max(1.0));
    // running payoff of P1 stays nonpositive on the intervention set
    push(
        "intervene_s_ge",
        p.r() * pp.w1(x1 - e) - (x1 - p.s()),
        (p.r() * pp.w1(x1 - e)).abs().max(1.0),
    );
    match pp.kind() {
        EquilibriumKind::TypeI => {
            // concave at the target, convex at the lower threshold
            let scale = pp.params().theta().powi(2);
            push("w1_concave_at_target", -pp.phi1_second_at(pp.x1_star()), scale);
            push("w1_convex_at_x1bar", pp.phi1_second_at(x1), scale);
        }
        EquilibriumKind::TypeII => {
            let w = (p.theta() * (x2 - x1)).exp();
            push(
                "impulse_to_stop_optimal",
                -((1.0 - p.a() * p.r()) * x2 - (1.0 - p.lambda() * p.r()) / p.theta() * w.ln()
                    + p.c() * p.r()
                    - p.s()),
                x2.abs().max(1.0),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OdeCoefficients;
    use crate::payoffs::PiecewisePayoff;
    use crate::scenario;
    use crate::type1::solve_type1;
    use crate::type2::solve_type2;

    fn all_payoffs() -> Vec<PiecewisePayoff> {
        let mut out = Vec::new();
        for name in ["type1-A", "type1-B"] {
            let p = scenario::builtin(name).unwrap().params;
            out.push(PiecewisePayoff::from_type1(&solve_type1(&p).unwrap(), p));
        }
        for name in ["type2-A", "type2-B"] {
            let p = scenario::builtin(name).unwrap().params;
            out.push(PiecewisePayoff::from_type2(&solve_type2(&p).unwrap(), p));
        }
        out
    }

    #[test]
    fn grid_too_coarse() {
        let pp = &all_payoffs()[0];
        let grid = GridSpec { n: 99, ..GridSpec::default_for(pp) };
        assert!(matches!(verify(pp, grid, 1e-7, 1e-4), Err(QviError::GridTooCoarse(99))));
    }

    #[test]
    fn solved_scenarios_certify() {
        for pp in all_payoffs() {
            let report = verify_default(&pp);
            assert!(report.pass(), "{}: failed {:?}", pp.kind(), report.failed());
            for r in &report.records {
                if r.id.starts_with("qvi") {
                    assert!(r.max_violation < 1e-7, "{}: {:e}", r.id, r.max_violation);
                }
            }
        }
    }

    #[test]
    fn type1_a_explicit_grid() {
        let p = scenario::builtin("type1-A").unwrap().params;
        let pp = PiecewisePayoff::from_type1(&solve_type1(&p).unwrap(), p);
        let report =
            verify(&pp, GridSpec { lo: -80.0, hi: 80.0, n: 10_000 }, 1e-7, 1e-4).unwrap();
        assert!(report.pass(), "failed {:?}", report.failed());
    }

    #[test]
    fn violation_shrinks_as_grid_refines() {
        let pp = &all_payoffs()[1];
        let base = GridSpec::default_for(pp);
        let coarse = verify(pp, GridSpec { n: 2_000, ..base }, 1e-7, 1e-4).unwrap();
        let fine = verify(pp, GridSpec { n: 4_000, ..base }, 1e-7, 1e-4).unwrap();
        let worst = |r: &QviReport| {
            r.records
                .iter()
                .filter(|c| c.id.starts_with("qvi"))
                .map(|c| c.max_violation)
                .fold(0.0, f64::max)
        };
        assert!(worst(&fine) <= worst(&coarse) + 1e-9);
    }

    #[test]
    fn pasting_residuals_small_at_solutions() {
        for pp in all_payoffs() {
            let report = pasting_report(&pp);
            let expected = match pp.kind() {
                crate::payoffs::EquilibriumKind::TypeI => 7,
                crate::payoffs::EquilibriumKind::TypeII => 6,
            };
            assert_eq!(report.len(), expected);
            for (id, res) in report {
                assert!(res.abs() < 1e-6, "{id}: {res:e}");
            }
        }
    }

    #[test]
    fn inequalities_pass_at_solutions() {
        for pp in all_payoffs() {
            for (id, value, pass) in verification_inequalities(&pp) {
                assert!(pass, "{id} = {value}");
            }
        }
        // spot value from direct arithmetic
        let p = scenario::builtin("type1-B").unwrap().params;
        let pp = PiecewisePayoff::from_type1(&solve_type1(&p).unwrap(), p);
        let (_, value, _) = verification_inequalities(&pp)
            .into_iter()
            .find(|(id, _, _)| *id == "stop_q_le")
            .unwrap();
        assert!((value - 6.73).abs() < 0.02, "got {value}");
    }

    #[test]
    fn shifted_threshold_is_flagged() {
        let p = scenario::builtin("type1-A").unwrap().params;
        let eq = solve_type1(&p).unwrap();
        let pp = PiecewisePayoff::new(
            crate::payoffs::EquilibriumKind::TypeI,
            eq.x1_bar + 0.5,
            eq.x1_star,
            eq.x2_bar,
            eq.coeffs,
            p,
        );
        let bad: Vec<_> = pasting_report(&pp)
            .into_iter()
            .filter(|(_, r)| r.abs() > 1e-3)
            .map(|(id, _)| id)
            .collect();
        assert!(bad.contains(&"c1_w1_x1bar"), "flagged: {bad:?}");
        assert!(!verify_default(&pp).pass());
    }

    #[test]
    fn broken_coefficients_are_flagged() {
        for pp in all_payoffs() {
            let eqs = pasting_report(&pp).len();
            let base = *pp.coeffs();
            for field in 0..4 {
                let mut c = base;
                let target = match field {
                    0 => &mut c.c11,
                    1 => &mut c.c12,
                    2 => &mut c.c21,
                    _ => &mut c.c22,
                };
                // scale the bump so the residual lands around 1e-2
                let theta = pp.params().theta();
                let unit = match field {
                    0 | 2 => (-theta * pp.x2_bar()).exp(),
                    _ => (theta * pp.x2_bar()).exp(),
                };
                *target += 1e-2 * unit;
                let bad = PiecewisePayoff::new(
                    pp.kind(),
                    pp.x1_bar(),
                    pp.x1_star(),
                    pp.x2_bar(),
                    c,
                    *pp.params(),
                );
                let flagged = pasting_report(&bad)
                    .into_iter()
                    .filter(|(_, r)| r.abs() > 1e-3)
                    .count();
                assert!(flagged > 0, "{} coeff {field} not flagged", pp.kind());
                assert_eq!(pasting_report(&bad).len(), eqs);
                assert!(!verify_default(&bad).pass());
            }
        }
    }

    #[test]
    fn kv_and_csv_render() {
        let pp = &all_payoffs()[0];
        let report = verify_default(pp);
        let kv = report.to_kv();
        assert!(kv.contains("pass = true"));
        assert!(kv.contains("qvi1_mw1_le_w1.max_violation"));
        let csv = report.to_csv();
        assert!(csv.starts_with("id,region,max_violation,argmax,pass\n"));
        assert_eq!(csv.lines().count(), report.records.len() + 1);
    }

    #[test]
    fn hand_built_nonsense_fails() {
        let p = scenario::builtin("type1-A").unwrap().params;
        let pp = PiecewisePayoff::new(
            crate::payoffs::EquilibriumKind::TypeI,
            -10.0,
            5.0,
            20.0,
            OdeCoefficients { c11: 1.0, c12: 1.0, c21: 1.0, c22: 1.0 },
            p,
        );
        assert!(!verify_default(&pp).pass());
    }
}
