//! Euler simulation of the controlled scaled Brownian motion under
//! threshold strategies, payoff estimation, and best-response deviation
//! scans with common random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::model::GameParams;
use crate::payoffs::PiecewisePayoff;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("dt must be positive, got {0}")]
    BadDt(f64),
    #[error("horizon {horizon} leaves discount tail e^(-rT) = {tail:e} > 1e-3")]
    HorizonTooShort { horizon: f64, tail: f64 },
    #[error("need at least 100 paths, got {0}")]
    TooFewPaths(u64),
    #[error("invalid strategy: need lower < upper and target in (lower, upper], got ({0}, {1}, {2})")]
    InvalidStrategy(f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    dt: f64,
    horizon: f64,
    n_paths: u64,
    pub seed: u64,
    pub antithetic: bool,
}

impl SimConfig {
    /// `horizon` must satisfy e^{-r*horizon} <= 1e-3 (up to rounding) so
    /// the truncation bias stays below discount-tail scale.
    pub fn new(
        dt: f64,
        horizon: f64,
        n_paths: u64,
        seed: u64,
        antithetic: bool,
        r: f64,
    ) -> Result<SimConfig, SimError> {
        if !(dt > 0.0) {
            return Err(SimError::BadDt(dt));
        }
        let tail = (-r * horizon).exp();
        if tail > 1e-3 * (1.0 + 1e-6) {
            return Err(SimError::HorizonTooShort { horizon, tail });
        }
        if n_paths < 100 {
            return Err(SimError::TooFewPaths(n_paths));
        }
        Ok(SimConfig { dt, horizon, n_paths, seed, antithetic })
    }

    /// dt = 0.01, T = ln(10^3)/r, 20k antithetic paths.
    pub fn default_for(r: f64, seed: u64) -> SimConfig {
        SimConfig::new(0.01, 1000f64.ln() / r, 20_000, seed, true, r).expect("valid by construction")
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn n_paths(&self) -> u64 {
        self.n_paths
    }

    pub fn with_paths(self, n_paths: u64) -> Result<SimConfig, SimError> {
        if n_paths < 100 {
            return Err(SimError::TooFewPaths(n_paths));
        }
        Ok(SimConfig { n_paths, ..self })
    }
}

/// A threshold strategy pair: P1 impulses from `lower` up to `target`, P2
/// stops at or above `upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdStrategy {
    pub lower: f64,
    pub target: f64,
    pub upper: f64,
}

impl ThresholdStrategy {
    /// `target > upper` is allowed: the impulse then lands in the stopping
    /// set and ends the game at the instant of intervention, which is how
    /// a stopper deviation below the equilibrium target plays out.
    pub fn new(lower: f64, target: f64, upper: f64) -> Result<ThresholdStrategy, SimError> {
        if lower < upper && target > lower {
            Ok(ThresholdStrategy { lower, target, upper })
        } else {
            Err(SimError::InvalidStrategy(lower, target, upper))
        }
    }

    pub fn from_payoff(pp: &PiecewisePayoff) -> ThresholdStrategy {
        ThresholdStrategy {
            lower: pp.x1_bar(),
            target: pp.x1_star(),
            upper: pp.x2_bar(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub j1_mean: f64,
    pub j1_se: f64,
    pub j2_mean: f64,
    pub j2_se: f64,
    pub n_interventions_mean: f64,
    /// Mean game duration, right-censored at the horizon.
    pub stop_time_mean: f64,
}

/// Per-path discounted outcomes.
#[derive(Debug, Clone, Copy, Default)]
struct PathOutcome {
    j1: f64,
    j2: f64,
    n_interventions: f64,
    stop_time: f64,
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // one independent stream per path index, independent of thread layout
    rng.set_stream(path);
    rng
}

fn run_path(
    x0: f64,
    strategy: &ThresholdStrategy,
    p: &GameParams,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
    flip: bool,
) -> PathOutcome {
    let (r, sigma) = (p.r(), p.sigma());
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let n_steps = (cfg.horizon / dt).ceil() as u64;
    let sign = if flip { -1.0 } else { 1.0 };

    let mut out = PathOutcome::default();
    let mut x = x0;
    let mut t = 0.0;
    for step in 0..=n_steps {
        let disc = (-r * t).exp();
        // stop check comes first: P2 acts on arrival
        if x >= strategy.upper {
            out.j1 += disc * p.a() * x;
            out.j2 += disc * (-p.b() * x);
            out.stop_time = t;
            return out;
        }
        if x <= strategy.lower {
            let delta = strategy.target - x;
            out.j1 -= disc * (p.c() + p.lambda() * delta);
            out.j2 += disc * (p.d() + p.gamma() * delta);
            out.n_interventions += 1.0;
            x = strategy.target;
            // re-check in the same instant: the impulse may land on the
            // stopping boundary
            if x >= strategy.upper {
                out.j1 += disc * p.a() * x;
                out.j2 += disc * (-p.b() * x);
                out.stop_time = t;
                return out;
            }
        }
        if step == n_steps {
            break;
        }
        out.j1 += disc * (x - p.s()) * dt;
        out.j2 += disc * (p.q() - x) * dt;
        let z: f64 = rng.sample(StandardNormal);
        x += sigma * sqrt_dt * sign * z;
        t += dt;
    }
    // truncated: no terminal payoff, bias bounded by e^{-rT} * scale
    out.stop_time = cfg.horizon;
    out
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    // shifted mean: exact (and zero-variance) when all values coincide
    let v0 = values[0];
    let mean = v0 + values.iter().map(|v| v - v0).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn outcomes(
    x0: f64,
    strategy: &ThresholdStrategy,
    p: &GameParams,
    cfg: &SimConfig,
) -> Vec<PathOutcome> {
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            if cfg.antithetic {
                // consecutive indices share a stream with flipped noise
                let mut rng = path_rng(cfg.seed, i / 2);
                run_path(x0, strategy, p, cfg, &mut rng, i % 2 == 1)
            } else {
                let mut rng = path_rng(cfg.seed, i);
                run_path(x0, strategy, p, cfg, &mut rng, false)
            }
        })
        .collect()
}

fn estimate_from(outcomes: &[PathOutcome], antithetic: bool) -> SimEstimate {
    // antithetic pairs are dependent; average each pair before the SE
    let collapse = |f: &dyn Fn(&PathOutcome) -> f64| -> Vec<f64> {
        if antithetic {
            outcomes.chunks(2).map(|c| c.iter().map(|o| f(o)).sum::<f64>() / c.len() as f64).collect()
        } else {
            outcomes.iter().map(f).collect()
        }
    };
    let (j1_mean, j1_se) = mean_se(&collapse(&|o| o.j1));
    let (j2_mean, j2_se) = mean_se(&collapse(&|o| o.j2));
    let (n_interventions_mean, _) = mean_se(&collapse(&|o| o.n_interventions));
    let (stop_time_mean, _) = mean_se(&collapse(&|o| o.stop_time));
    SimEstimate { j1_mean, j1_se, j2_mean, j2_se, n_interventions_mean, stop_time_mean }
}

/// Estimate both players' discounted payoffs from `x0` under a threshold
/// strategy pair.
pub fn simulate(
    x0: f64,
    strategy: &ThresholdStrategy,
    p: &GameParams,
    cfg: &SimConfig,
) -> SimEstimate {
    estimate_from(&outcomes(x0, strategy, p, cfg), cfg.antithetic)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Shift P1's intervention threshold.
    Lower(f64),
    /// Shift P1's impulse target.
    Target(f64),
    /// Shift P2's stopping threshold.
    Upper(f64),
}

impl Perturbation {
    pub fn player(&self) -> u8 {
        match self {
            Perturbation::Lower(_) | Perturbation::Target(_) => 1,
            Perturbation::Upper(_) => 2,
        }
    }

    fn apply(&self, s: &ThresholdStrategy) -> Result<ThresholdStrategy, SimError> {
        let mut t = *s;
        match self {
            Perturbation::Lower(d) => t.lower += d,
            Perturbation::Target(d) => t.target += d,
            Perturbation::Upper(d) => t.upper += d,
        }
        ThresholdStrategy::new(t.lower, t.target, t.upper)
    }
}

impl std::fmt::Display for Perturbation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Perturbation::Lower(d) => write!(f, "lower{d:+}"),
            Perturbation::Target(d) => write!(f, "target{d:+}"),
            Perturbation::Upper(d) => write!(f, "upper{d:+}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRow {
    pub perturbation: Perturbation,
    pub player: u8,
    /// Deviating player's payoff change vs the equilibrium arm.
    pub delta_mean: f64,
    /// Standard error of the per-path payoff differences.
    pub delta_se: f64,
    pub improves: bool,
}

/// Estimate the payoff change for single-player deviations from the
/// equilibrium strategy. All arms share the same random numbers, so the
/// reported standard error is that of the per-path differences.
pub fn best_response_scan(
    x0: f64,
    strategy: &ThresholdStrategy,
    p: &GameParams,
    cfg: &SimConfig,
    perturbations: &[Perturbation],
) -> Result<Vec<DeviationRow>, SimError> {
    let base = outcomes(x0, strategy, p, cfg);
    let mut rows = Vec::with_capacity(perturbations.len());
    for &pert in perturbations {
        let deviated = pert.apply(strategy)?;
        let arm = outcomes(x0, &deviated, p, cfg);
        let player = pert.player();
        let diffs: Vec<f64> = arm
            .iter()
            .zip(&base)
            .map(|(a, b)| if player == 1 { a.j1 - b.j1 } else { a.j2 - b.j2 })
            .collect();
        let paired: Vec<f64> = if cfg.antithetic {
            diffs.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
        } else {
            diffs
        };
        let (delta_mean, delta_se) = mean_se(&paired);
        rows.push(DeviationRow {
            perturbation: pert,
            player,
            delta_mean,
            delta_se,
            improves: delta_mean > 3.0 * delta_se,
        });
    }
    Ok(rows)
}
