//! Game parameters and the fundamental ODE solutions.
//!
//! The game lives on a one-dimensional state driven by a scaled Brownian
//! motion. Player 1 (the controller) pays `c + lambda*|delta|` per impulse
//! and collects the running payoff `x - s`; player 2 (the stopper) collects
//! `q - x` while the game runs, gains `d + gamma*|delta|` whenever P1 acts,
//! and the terminal payoffs on stopping are `a*x` for P1 and `-b*x` for P2.
//!
//! In the continuation region both candidate payoffs solve a linear
//! second-order ODE whose general solution is a pair of exponentials
//! `e^{±theta*x}` plus an affine particular part, with
//! `theta = sqrt(2r/sigma^2)`.

use thiserror::Error;

/// Parameter validation failure; carries the violated constraint.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter {name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("parameter {name} must be nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("terminal sensitivity must stay below the proportional rate: need a < lambda, got a = {a}, lambda = {lambda}")]
    AOverLambda { a: f64, lambda: f64 },
    #[error("terminal sensitivity must stay below the proportional rate: need b < gamma, got b = {b}, gamma = {gamma}")]
    BOverGamma { b: f64, gamma: f64 },
    #[error("need 1 - lambda*r > 0, got lambda = {lambda}, r = {r}")]
    LambdaRate { lambda: f64, r: f64 },
    #[error("need 1 - b*r > 0, got b = {b}, r = {r}")]
    BRate { b: f64, r: f64 },
    #[error("parameter {name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
}

/// The ten scalars defining the linear game. Immutable once validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams {
    r: f64,
    sigma: f64,
    c: f64,
    d: f64,
    lambda: f64,
    gamma: f64,
    a: f64,
    b: f64,
    s: f64,
    q: f64,
}

impl GameParams {
    /// Validates and builds a parameter set.
    ///
    /// Requires `a < lambda`, `b < gamma`, `1 - lambda*r > 0`, `1 - b*r > 0`
    /// and, because every threshold formula divides by it, `1 - a*r > 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        sigma: f64,
        c: f64,
        d: f64,
        lambda: f64,
        gamma: f64,
        a: f64,
        b: f64,
        s: f64,
        q: f64,
    ) -> Result<GameParams, ParamError> {
        let finite = [
            ("r", r),
            ("sigma", sigma),
            ("c", c),
            ("d", d),
            ("lambda", lambda),
            ("gamma", gamma),
            ("a", a),
            ("b", b),
            ("s", s),
            ("q", q),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
        }
        let positive = [
            ("r", r),
            ("sigma", sigma),
            ("c", c),
            ("d", d),
            ("lambda", lambda),
            ("gamma", gamma),
            ("s", s),
        ];
        for (name, value) in positive {
            if value <= 0.0 {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        for (name, value) in [("a", a), ("b", b), ("q", q)] {
            if value < 0.0 {
                return Err(ParamError::Negative { name, value });
            }
        }
        if a >= lambda {
            return Err(ParamError::AOverLambda { a, lambda });
        }
        if b >= gamma {
            return Err(ParamError::BOverGamma { b, gamma });
        }
        if 1.0 - lambda * r <= 0.0 {
            return Err(ParamError::LambdaRate { lambda, r });
        }
        if 1.0 - b * r <= 0.0 {
            return Err(ParamError::BRate { b, r });
        }
        // the threshold formulas also divide by 1 - a*r, but a < lambda and
        // 1 - lambda*r > 0 already force it positive
        debug_assert!(1.0 - a * r > 0.0);
        Ok(GameParams {
            r,
            sigma,
            c,
            d,
            lambda,
            gamma,
            a,
            b,
            s,
            q,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Exponent of the homogeneous ODE solutions, `sqrt(2r/sigma^2)`.
    pub fn theta(&self) -> f64 {
        (2.0 * self.r / (self.sigma * self.sigma)).sqrt()
    }
}

/// Coefficients of the exponential parts of the two candidate payoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeCoefficients {
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    pub c22: f64,
}

impl OdeCoefficients {
    pub fn is_finite(&self) -> bool {
        self.c11.is_finite() && self.c12.is_finite() && self.c21.is_finite() && self.c22.is_finite()
    }
}

/// P1's continuation-region payoff candidate:
/// `C11*e^{theta x} + C12*e^{-theta x} + (x - s)/r`.
pub fn phi1(x: f64, co: &OdeCoefficients, p: &GameParams) -> f64 {
    let t = p.theta();
    co.c11 * (t * x).exp() + co.c12 * (-t * x).exp() + (x - p.s()) / p.r()
}

/// P2's continuation-region payoff candidate:
/// `C21*e^{theta x} + C22*e^{-theta x} + (q - x)/r`.
pub fn phi2(x: f64, co: &OdeCoefficients, p: &GameParams) -> f64 {
    let t = p.theta();
    co.c21 * (t * x).exp() + co.c22 * (-t * x).exp() + (p.q() - x) / p.r()
}

pub fn phi1_prime(x: f64, co: &OdeCoefficients, p: &GameParams) -> f64 {
    let t = p.theta();
    t * co.c11 * (t * x).exp() - t * co.c12 * (-t * x).exp() + 1.0 / p.r()
}

pub fn phi2_prime(x: f64, co: &OdeCoefficients, p: &GameParams) -> f64 {
    let t = p.theta();
    t * co.c21 * (t * x).exp() - t * co.c22 * (-t * x).exp() - 1.0 / p.r()
}

pub fn phi1_second(x: f64, co: &OdeCoefficients, p: &GameParams) -> f64 {
    let t = p.theta();
    t * t * (co.c11 * (t * x).exp() + co.c12 * (-t * x).exp())
}

pub fn phi2_second(x: f64, co: &OdeCoefficients, p: &GameParams) -> f64 {
    let t = p.theta();
    t * t * (co.c21 * (t * x).exp() + co.c22 * (-t * x).exp())
}

/// Residual of `0.5*sigma^2*phi1'' - r*phi1 + (x - s)`; identically zero in
/// exact arithmetic for any coefficients.
pub fn ode_residual1(x: f64, co: &OdeCoefficients, p: &GameParams) -> f64 {
    0.5 * p.sigma() * p.sigma() * phi1_second(x, co, p) - p.r() * phi1(x, co, p) + (x - p.s())
}

/// Residual of `0.5*sigma^2*phi2'' - r*phi2 + (q - x)`.
pub fn ode_residual2(x: f64, co: &OdeCoefficients, p: &GameParams) -> f64 {
    0.5 * p.sigma() * p.sigma() * phi2_second(x, co, p) - p.r() * phi2(x, co, p) + (p.q() - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn params_t1a() -> GameParams {
        GameParams::new(0.01, 5.0, 500.0, 100.0, 20.0, 40.0, 0.0, 0.0, 1.0, 5.0).unwrap()
    }

    #[test]
    fn theta_values() {
        let p = params_t1a();
        assert_relative_eq!(p.theta(), 0.0282843, max_relative = 1e-5);
        let p = GameParams::new(0.5, 1.0, 1.0, 1.0, 1.9, 1.9, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(p.theta(), 1.0);
        let p = GameParams::new(0.01, 1.5, 50.0, 150.0, 10.0, 15.0, 2.0, 8.0, 10.0, 10.0).unwrap();
        assert_relative_eq!(p.theta(), 0.0942809, max_relative = 1e-5);
    }

    #[test]
    fn particular_solutions_vanish_at_offsets() {
        let p = params_t1a();
        let co = OdeCoefficients {
            c11: 0.0,
            c12: 0.0,
            c21: 0.0,
            c22: 0.0,
        };
        assert_eq!(phi1(p.s(), &co, &p), 0.0);
        assert_eq!(phi2(p.q(), &co, &p), 0.0);
        assert_eq!(ode_residual1(p.s(), &co, &p), 0.0);
    }

    #[test]
    fn rejects_each_constraint_violation() {
        // a >= lambda
        assert!(matches!(
            GameParams::new(0.01, 5.0, 500.0, 100.0, 20.0, 40.0, 20.0, 0.0, 1.0, 5.0),
            Err(ParamError::AOverLambda { .. })
        ));
        // b >= gamma
        assert!(matches!(
            GameParams::new(0.01, 5.0, 500.0, 100.0, 20.0, 40.0, 0.0, 40.0, 1.0, 5.0),
            Err(ParamError::BOverGamma { .. })
        ));
        // 1 - lambda*r <= 0
        assert!(matches!(
            GameParams::new(0.01, 5.0, 500.0, 100.0, 100.0, 400.0, 0.0, 0.0, 1.0, 5.0),
            Err(ParamError::LambdaRate { .. })
        ));
        // 1 - b*r <= 0
        assert!(matches!(
            GameParams::new(0.01, 5.0, 500.0, 100.0, 20.0, 400.0, 0.0, 100.0, 1.0, 5.0),
            Err(ParamError::BRate { .. })
        ));
        // 1 - a*r > 0 needs no check of its own: a < lambda and
        // 1 - lambda*r > 0 imply it, so the lambda constraint fires first
        assert!(matches!(
            GameParams::new(0.009, 5.0, 500.0, 100.0, 120.0, 400.0, 115.0, 0.0, 1.0, 5.0),
            Err(ParamError::LambdaRate { .. })
        ));
        // strict positivity
        assert!(matches!(
            GameParams::new(0.01, 5.0, 0.0, 100.0, 20.0, 40.0, 0.0, 0.0, 1.0, 5.0),
            Err(ParamError::NotPositive { name: "c", .. })
        ));
    }

    proptest! {
        #[test]
        fn ode_residuals_vanish(
            c11 in -1e3f64..1e3, c12 in -1e3f64..1e3,
            c21 in -1e3f64..1e3, c22 in -1e3f64..1e3,
            x in -1e3f64..1e3,
        ) {
            let p = params_t1a();
            let co = OdeCoefficients { c11, c12, c21, c22 };
            let scale1 = phi1(x, &co, &p).abs().max(1.0);
            let scale2 = phi2(x, &co, &p).abs().max(1.0);
            prop_assert!(ode_residual1(x, &co, &p).abs() <= 1e-9 * scale1.max((x - p.s()).abs()));
            prop_assert!(ode_residual2(x, &co, &p).abs() <= 1e-9 * scale2.max((p.q() - x).abs()));
        }

        #[test]
        fn analytic_derivative_matches_central_difference(
            c11 in -10.0f64..10.0, c12 in -10.0f64..10.0,
            x in -50.0f64..50.0,
        ) {
            let p = params_t1a();
            let co = OdeCoefficients { c11, c12, c21: c12, c22: c11 };
            let h = 1e-5;
            let fd1 = (phi1(x + h, &co, &p) - phi1(x - h, &co, &p)) / (2.0 * h);
            let fd2 = (phi2(x + h, &co, &p) - phi2(x - h, &co, &p)) / (2.0 * h);
            let d1 = phi1_prime(x, &co, &p);
            let d2 = phi2_prime(x, &co, &p);
            prop_assert!((fd1 - d1).abs() <= 1e-5 * d1.abs().max(1.0));
            prop_assert!((fd2 - d2).abs() <= 1e-5 * d2.abs().max(1.0));
        }
    }
}
