//! End-to-end acceptance gate. Each numbered test prints a single
//! `PASS`/`FAIL` line for its criterion before asserting.

use impulse_game::montecarlo::{
    best_response_scan, simulate, Perturbation, SimConfig, ThresholdStrategy,
};
use impulse_game::payoffs::PiecewisePayoff;
use impulse_game::qvi::{self, pasting_report, verify_default, GridSpec};
use impulse_game::scenario::{builtin, ExpectedEquilibrium};
use impulse_game::type1::{solve_type1, solve_type1_with, SolverOptions};
use impulse_game::type2::{solve_type2, solve_type2_with};

fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "[{}] criterion {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn payoff_for(name: &str) -> PiecewisePayoff {
    let p = builtin(name).unwrap().params;
    if name.starts_with("type1") {
        PiecewisePayoff::from_type1(&solve_type1(&p).unwrap(), p)
    } else {
        PiecewisePayoff::from_type2(&solve_type2(&p).unwrap(), p)
    }
}

#[test]
fn criterion_1_golden_thresholds_type1() {
    let t0 = std::time::Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for name in ["type1-A", "type1-B"] {
        let sc = builtin(name).unwrap();
        let eq = solve_type1(&sc.params).unwrap();
        let ExpectedEquilibrium::Type1 { x1_bar, x1_star, x2_bar } = sc.expected.unwrap() else {
            unreachable!()
        };
        ok &= (eq.x1_bar - x1_bar).abs() <= 0.02
            && (eq.x1_star - x1_star).abs() <= 0.02
            && (eq.x2_bar - x2_bar).abs() <= 0.02;
        detail.push_str(&format!(
            "{name}: ({:.4}, {:.4}, {:.4}) vs ({x1_bar}, {x1_star}, {x2_bar}); ",
            eq.x1_bar, eq.x1_star, eq.x2_bar
        ));
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 1.0;
    detail.push_str(&format!("{elapsed:.2?}"));
    assert!(report("1 (Type I golden thresholds)", ok, &detail));
}

#[test]
fn criterion_2_golden_thresholds_type2() {
    let t0 = std::time::Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for name in ["type2-A", "type2-B"] {
        let sc = builtin(name).unwrap();
        let eq = solve_type2(&sc.params).unwrap();
        let ExpectedEquilibrium::Type2 { x1_bar, x2_bar } = sc.expected.unwrap() else {
            unreachable!()
        };
        ok &= (eq.x1_bar - x1_bar).abs() <= 0.05 && (eq.x2_bar - x2_bar).abs() <= 0.05;
        detail.push_str(&format!(
            "{name}: ({:.4}, {:.4}) vs ({x1_bar}, {x2_bar}); ",
            eq.x1_bar, eq.x2_bar
        ));
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 1.0;
    detail.push_str(&format!("{elapsed:.2?}"));
    assert!(report("2 (Type II golden thresholds)", ok, &detail));
}

#[test]
fn criterion_3_pasting_residuals() {
    let mut ok = true;
    let mut detail = String::new();
    for name in ["type1-A", "type1-B", "type2-A", "type2-B"] {
        let pp = payoff_for(name);
        let worst = pasting_report(&pp)
            .into_iter()
            .map(|(_, r)| r.abs())
            .fold(0.0, f64::max);
        ok &= worst < 1e-6;
        detail.push_str(&format!("{name}: worst {worst:.2e}; "));
    }
    assert!(report("3 (pasting residuals < 1e-6)", ok, &detail));
}

#[test]
fn criterion_4_qvi_certification_and_fault_injection() {
    let mut ok = true;
    let mut detail = String::new();
    for name in ["type1-A", "type1-B", "type2-A", "type2-B"] {
        let pp = payoff_for(name);
        let rep = verify_default(&pp);
        let worst_analytic = rep
            .records
            .iter()
            .filter(|r| r.id.starts_with("qvi"))
            .map(|r| r.max_violation)
            .fold(0.0, f64::max);
        let fd_pass = rep
            .records
            .iter()
            .filter(|r| r.id.starts_with("fd_"))
            .all(|r| r.max_violation < 1e-4);
        ok &= rep.pass() && worst_analytic < 1e-7 && fd_pass;
        detail.push_str(&format!("{name}: worst {worst_analytic:.2e}; "));

        // fault injection: break each pasting equation via its threshold or
        // coefficient and require detection
        let n_eqs = pasting_report(&pp).len();
        let mut detected = 0usize;
        let faults: Vec<PiecewisePayoff> = {
            let mut v = Vec::new();
            // threshold shifts hit the pasting equations at x1_bar / x2_bar
            for (dx1, dxs, dx2) in [(0.5, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 0.5)] {
                v.push(PiecewisePayoff::new(
                    pp.kind(),
                    pp.x1_bar() + dx1,
                    pp.x1_star() + dxs,
                    pp.x2_bar() + dx2,
                    *pp.coeffs(),
                    *pp.params(),
                ));
            }
            // coefficient bumps break the remaining equations
            let theta = pp.params().theta();
            for field in 0..4 {
                let mut c = *pp.coeffs();
                let unit = match field {
                    0 | 2 => (-theta * pp.x2_bar()).exp(),
                    _ => (theta * pp.x2_bar()).exp(),
                };
                match field {
                    0 => c.c11 += 1e-2 * unit,
                    1 => c.c12 += 1e-2 * unit,
                    2 => c.c21 += 1e-2 * unit,
                    _ => c.c22 += 1e-2 * unit,
                }
                v.push(PiecewisePayoff::new(
                    pp.kind(),
                    pp.x1_bar(),
                    pp.x1_star(),
                    pp.x2_bar(),
                    c,
                    *pp.params(),
                ));
            }
            v
        };
        let n_faults = faults.len();
        for bad in faults {
            let bad_pasting = pasting_report(&bad).iter().any(|(_, r)| r.abs() > 1e-6);
            let grid = GridSpec { n: 2_000, ..GridSpec::default_for(&bad) };
            let bad_verify = !qvi::verify(&bad, grid, 1e-7, 1e-4).unwrap().pass();
            if bad_pasting || bad_verify {
                detected += 1;
            }
        }
        ok &= detected == n_faults;
        detail.push_str(&format!("faults {detected}/{n_faults} ({n_eqs} eqs); "));
    }
    assert!(report("4 (QVI certification + fault injection)", ok, &detail));
}

#[test]
fn criterion_5_monte_carlo_agreement() {
    let t0 = std::time::Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for name in ["type1-A", "type1-B", "type2-A", "type2-B"] {
        let pp = payoff_for(name);
        let p = *pp.params();
        let strategy = ThresholdStrategy::from_payoff(&pp);
        let cfg = SimConfig::new(0.01, 1000f64.ln() / p.r(), 20_000, 20_260, true, p.r()).unwrap();
        let width = pp.x2_bar() - pp.x1_bar();
        // discrete-monitoring bias allowance: mean boundary overshoot of an
        // Euler walk is ~0.5826 sigma sqrt(dt), charged at the payoff slopes
        // active when a threshold is crossed
        let overshoot = 0.5826 * p.sigma() * cfg.dt().sqrt();
        let slope1 = p.lambda() + p.a().abs();
        let slope2 = p.gamma() + p.b().abs();
        let mut worst = 0.0f64;
        for i in 1..=5 {
            let x0 = pp.x1_bar() + width * i as f64 / 6.0;
            let est = simulate(x0, &strategy, &p, &cfg);
            for (mean, se, w, slope) in [
                (est.j1_mean, est.j1_se, pp.w1(x0), slope1),
                (est.j2_mean, est.j2_se, pp.w2(x0), slope2),
            ] {
                let err = (mean - w).abs();
                let allowed = 3.0 * se + 0.005 * w.abs() + overshoot * slope;
                ok &= err < allowed;
                worst = worst.max(err / allowed);
            }
        }
        // degenerate starts match closed forms exactly
        let hi = pp.x2_bar() + 1.0;
        let est = simulate(hi, &strategy, &p, &cfg);
        ok &= est.j1_mean == p.a() * hi && est.j2_mean == -p.b() * hi && est.j1_se == 0.0;
        if name.starts_with("type2") {
            let lo = pp.x1_bar() - 1.0;
            let est = simulate(lo, &strategy, &p, &cfg);
            let delta = pp.x2_bar() - lo;
            ok &= (est.j1_mean - (p.a() * pp.x2_bar() - p.c() - p.lambda() * delta)).abs() < 1e-9
                && (est.j2_mean - (-p.b() * pp.x2_bar() + p.d() + p.gamma() * delta)).abs() < 1e-9
                && est.j1_se == 0.0;
        }
        detail.push_str(&format!("{name}: worst err/allowed {worst:.2}; "));
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 300.0;
    detail.push_str(&format!("{elapsed:.1?}"));
    assert!(report("5 (Monte Carlo agreement)", ok, &detail));
}

#[test]
fn criterion_6_best_response() {
    let mut ok = true;
    let mut detail = String::new();
    for name in ["type1-A", "type1-B", "type2-A", "type2-B"] {
        let pp = payoff_for(name);
        let p = *pp.params();
        let strategy = ThresholdStrategy::from_payoff(&pp);
        let cfg = SimConfig::new(0.01, 1000f64.ln() / p.r(), 4_000, 61, true, p.r()).unwrap();
        let x0 = 0.5 * (pp.x1_bar() + pp.x2_bar());
        // 8 single-player perturbations: +-1, +-2 on each player's lever
        let perts: Vec<Perturbation> = [1.0, -1.0, 2.0, -2.0]
            .into_iter()
            .flat_map(|d| {
                let p1 = if pp.kind() == impulse_game::payoffs::EquilibriumKind::TypeI {
                    Perturbation::Target(d)
                } else {
                    // Type II: the target is pinned to x2_bar, so P1's free
                    // lever is the intervention threshold
                    Perturbation::Lower(d)
                };
                [p1, Perturbation::Upper(d)]
            })
            .collect();
        let rows = best_response_scan(x0, &strategy, &p, &cfg, &perts).unwrap();
        assert_eq!(rows.len(), 8);
        let mut worst_t = f64::NEG_INFINITY;
        for row in &rows {
            ok &= !row.improves;
            if row.delta_se > 0.0 {
                worst_t = worst_t.max(row.delta_mean / row.delta_se);
            }
        }
        detail.push_str(&format!("{name}: max t-stat {worst_t:.2}; "));
    }
    assert!(report("6 (no profitable deviation)", ok, &detail));
}

/// Recompute the Type I root under a one-parameter bump.
fn w_tilde_with(name: &str, param: &str, rel: f64) -> f64 {
    let p = builtin(name).unwrap().params;
    let v = |x: f64| x * (1.0 + rel);
    let q = match param {
        "a" => impulse_game::model::GameParams::new(
            p.r(), p.sigma(), p.c(), p.d(), p.lambda(), p.gamma(), v(p.a()), p.b(), p.s(), p.q(),
        ),
        "b" => impulse_game::model::GameParams::new(
            p.r(), p.sigma(), p.c(), p.d(), p.lambda(), p.gamma(), p.a(), v(p.b()), p.s(), p.q(),
        ),
        "s" => impulse_game::model::GameParams::new(
            p.r(), p.sigma(), p.c(), p.d(), p.lambda(), p.gamma(), p.a(), p.b(), v(p.s()), p.q(),
        ),
        "c" => impulse_game::model::GameParams::new(
            p.r(), p.sigma(), v(p.c()), p.d(), p.lambda(), p.gamma(), p.a(), p.b(), p.s(), p.q(),
        ),
        "d" => impulse_game::model::GameParams::new(
            p.r(), p.sigma(), p.c(), v(p.d()), p.lambda(), p.gamma(), p.a(), p.b(), p.s(), p.q(),
        ),
        "q" => impulse_game::model::GameParams::new(
            p.r(), p.sigma(), p.c(), p.d(), p.lambda(), p.gamma(), p.a(), p.b(), p.s(), v(p.q()),
        ),
        "lambda" => impulse_game::model::GameParams::new(
            p.r(), p.sigma(), p.c(), p.d(), v(p.lambda()), p.gamma(), p.a(), p.b(), p.s(), p.q(),
        ),
        "gamma" => impulse_game::model::GameParams::new(
            p.r(), p.sigma(), p.c(), p.d(), p.lambda(), v(p.gamma()), p.a(), p.b(), p.s(), p.q(),
        ),
        _ => unreachable!(),
    }
    .unwrap();
    let opts = SolverOptions::default();
    if name.starts_with("type1") {
        solve_type1_with(&q, &opts).unwrap().w_tilde
    } else {
        solve_type2_with(&q, &opts).unwrap().w_hat
    }
}

#[test]
fn criterion_7_comparative_statics() {
    let mut ok = true;
    let mut detail = String::new();
    let decreasing = ["a", "b", "s"];
    let increasing = ["c", "d", "q", "lambda", "gamma"];
    for name in ["type1-B", "type2-B"] {
        let base = w_tilde_with(name, "a", 0.0);
        for param in decreasing {
            let up = w_tilde_with(name, param, 0.01);
            let down = w_tilde_with(name, param, -0.01);
            let good = up < base && down > base;
            if !good {
                detail.push_str(&format!(
                    "{name}: w not decreasing in {param} (base {base:.6}, +1% {up:.6}, -1% {down:.6}); "
                ));
            }
            ok &= good;
        }
        for param in increasing {
            let up = w_tilde_with(name, param, 0.01);
            let down = w_tilde_with(name, param, -0.01);
            let good = up > base && down < base;
            if !good {
                detail.push_str(&format!(
                    "{name}: w not increasing in {param} (base {base:.6}, +1% {up:.6}, -1% {down:.6}); "
                ));
            }
            ok &= good;
        }
    }
    // lambda sweep on type1-B: the trigger-to-target gap ln(z)/theta grows
    // without bound as lambda*r -> 1, i.e. intervention fades out
    let p = builtin("type1-B").unwrap().params;
    let mut prev_gap = f64::NEG_INFINITY;
    let mut monotone = true;
    for lambda in [10.0, 30.0, 50.0, 70.0, 90.0] {
        let q = impulse_game::model::GameParams::new(
            p.r(), p.sigma(), p.c(), p.d(), lambda, p.gamma(), p.a(), p.b(), p.s(), p.q(),
        )
        .unwrap();
        let z = impulse_game::type1::solve_f(&q).unwrap();
        let gap = z.ln() / q.theta();
        monotone &= gap > prev_gap;
        prev_gap = gap;
    }
    ok &= monotone;
    detail.push_str(&format!("lambda sweep widens trigger gap: {monotone}"));
    assert!(report("7 (comparative statics signs)", ok, &detail));
}

#[test]
fn criterion_8_cli_pipeline() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_impulse-game");
    let mut ok = true;
    let mut detail = String::new();

    // solve all four builtins, exit 0
    for name in ["type1-A", "type1-B", "type2-A", "type2-B"] {
        let out = Command::new(bin).args(["solve", "--scenario", name]).output().unwrap();
        ok &= out.status.code() == Some(0);
    }
    detail.push_str("solve ok; ");

    // verify certifies
    let out = Command::new(bin).args(["verify", "--scenario", "type1-A"]).output().unwrap();
    ok &= out.status.code() == Some(0);
    ok &= String::from_utf8_lossy(&out.stdout).contains("certified");
    detail.push_str("verify ok; ");

    // deterministic simulate CSV
    let dir = tempfile::tempdir().unwrap();
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    for path in [&csv1, &csv2] {
        let out = Command::new(bin)
            .args([
                "simulate", "--scenario", "type1-B", "--x0", "10", "--paths", "2000", "--seed",
                "5", "--out",
            ])
            .arg(path)
            .output()
            .unwrap();
        ok &= out.status.code() == Some(0);
    }
    ok &= std::fs::read(&csv1).unwrap() == std::fs::read(&csv2).unwrap();
    detail.push_str("simulate deterministic; ");

    // exit codes: bad config -> 1, no equilibrium -> 2
    let out = Command::new(bin).args(["solve", "--scenario", "nope"]).output().unwrap();
    ok &= out.status.code() == Some(1);
    assert!(report("8 (CLI pipeline)", ok, &detail));
}
