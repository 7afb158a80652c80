//! Piecewise evaluation of the candidate equilibrium payoffs, the optimal
//! impulse size, and the two intervention operators.
//!
//! Both candidates share the same three-region layout: linear stopping
//! piece on the right, an exponential-plus-affine middle, and a linear
//! intervention piece on the left. Exponentials are evaluated relative to
//! the upper threshold so that large `|x|` never touches them.

use crate::model::{GameParams, OdeCoefficients};
use crate::type1::Type1Equilibrium;
use crate::type2::Type2Equilibrium;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    TypeI,
    TypeII,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquilibriumKind::TypeI => write!(f, "type1"),
            EquilibriumKind::TypeII => write!(f, "type2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `(-inf, x1_bar]`: P1 intervenes on arrival.
    Intervention,
    /// `(x1_bar, x2_bar)`: no one acts.
    Continuation,
    /// `[x2_bar, inf)`: P2 stops on arrival.
    Stopping,
}

/// Evaluator for the candidate payoffs `W1`, `W2` of either equilibrium
/// type. Immutable; all methods are pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewisePayoff {
    kind: EquilibriumKind,
    x1_bar: f64,
    x1_star: f64,
    x2_bar: f64,
    coeffs: OdeCoefficients,
    params: GameParams,
    // exponential parts rebased at x2_bar: dij = cij * e^{+-theta*x2_bar}
    d11: f64,
    d12: f64,
    d21: f64,
    d22: f64,
}

impl PiecewisePayoff {
    pub fn new(
        kind: EquilibriumKind,
        x1_bar: f64,
        x1_star: f64,
        x2_bar: f64,
        coeffs: OdeCoefficients,
        params: GameParams,
    ) -> PiecewisePayoff {
        let t = params.theta();
        PiecewisePayoff {
            kind,
            x1_bar,
            x1_star,
            x2_bar,
            coeffs,
            params,
            d11: coeffs.c11 * (t * x2_bar).exp(),
            d12: coeffs.c12 * (-t * x2_bar).exp(),
            d21: coeffs.c21 * (t * x2_bar).exp(),
            d22: coeffs.c22 * (-t * x2_bar).exp(),
        }
    }

    pub fn from_type1(eq: &Type1Equilibrium, params: GameParams) -> PiecewisePayoff {
        PiecewisePayoff::new(
            EquilibriumKind::TypeI,
            eq.x1_bar,
            eq.x1_star,
            eq.x2_bar,
            eq.coeffs,
            params,
        )
    }

    pub fn from_type2(eq: &Type2Equilibrium, params: GameParams) -> PiecewisePayoff {
        // the impulse target coincides with the stopping boundary
        PiecewisePayoff::new(
            EquilibriumKind::TypeII,
            eq.x1_bar,
            eq.x2_bar,
            eq.x2_bar,
            eq.coeffs,
            params,
        )
    }

    pub fn kind(&self) -> EquilibriumKind {
        self.kind
    }
    pub fn x1_bar(&self) -> f64 {
        self.x1_bar
    }
    /// Impulse target; equals `x2_bar` for Type II.
    pub fn x1_star(&self) -> f64 {
        self.x1_star
    }
    pub fn x2_bar(&self) -> f64 {
        self.x2_bar
    }
    pub fn coeffs(&self) -> &OdeCoefficients {
        &self.coeffs
    }
    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn region(&self, x: f64) -> Region {
        if x >= self.x2_bar {
            Region::Stopping
        } else if x > self.x1_bar {
            Region::Continuation
        } else {
            Region::Intervention
        }
    }

    /// Continuation-piece value, regardless of which region `x` is in.
    pub fn phi1_at(&self, x: f64) -> f64 {
        let t = self.params.theta();
        let u = x - self.x2_bar;
        self.d11 * (t * u).exp() + self.d12 * (-t * u).exp() + (x - self.params.s()) / self.params.r()
    }

    pub fn phi2_at(&self, x: f64) -> f64 {
        let t = self.params.theta();
        let u = x - self.x2_bar;
        self.d21 * (t * u).exp() + self.d22 * (-t * u).exp() + (self.params.q() - x) / self.params.r()
    }

    pub fn phi1_prime_at(&self, x: f64) -> f64 {
        let t = self.params.theta();
        let u = x - self.x2_bar;
        t * self.d11 * (t * u).exp() - t * self.d12 * (-t * u).exp() + 1.0 / self.params.r()
    }

    pub fn phi2_prime_at(&self, x: f64) -> f64 {
        let t = self.params.theta();
        let u = x - self.x2_bar;
        t * self.d21 * (t * u).exp() - t * self.d22 * (-t * u).exp() - 1.0 / self.params.r()
    }

    pub fn phi1_second_at(&self, x: f64) -> f64 {
        let t = self.params.theta();
        let u = x - self.x2_bar;
        t * t * (self.d11 * (t * u).exp() + self.d12 * (-t * u).exp())
    }

    pub fn phi2_second_at(&self, x: f64) -> f64 {
        let t = self.params.theta();
        let u = x - self.x2_bar;
        t * t * (self.d21 * (t * u).exp() + self.d22 * (-t * u).exp())
    }

    /// P1's candidate payoff.
    pub fn w1(&self, x: f64) -> f64 {
        match self.region(x) {
            Region::Stopping => self.params.a() * x,
            Region::Continuation => self.phi1_at(x),
            Region::Intervention => {
                // post-impulse value minus intervention cost, linear in x
                let target_value = match self.kind {
                    EquilibriumKind::TypeI => self.phi1_at(self.x1_star),
                    EquilibriumKind::TypeII => self.params.a() * self.x2_bar,
                };
                target_value - self.params.c() - self.params.lambda() * (self.x1_star - x)
            }
        }
    }

    /// P2's candidate payoff.
    pub fn w2(&self, x: f64) -> f64 {
        match self.region(x) {
            Region::Stopping => -self.params.b() * x,
            Region::Continuation => self.phi2_at(x),
            Region::Intervention => {
                let target_value = match self.kind {
                    EquilibriumKind::TypeI => self.phi2_at(self.x1_star),
                    EquilibriumKind::TypeII => -self.params.b() * self.x2_bar,
                };
                target_value + self.params.d() + self.params.gamma() * (self.x1_star - x)
            }
        }
    }

    /// First derivative of `W1` away from the kinks.
    pub fn w1_prime(&self, x: f64) -> f64 {
        match self.region(x) {
            Region::Stopping => self.params.a(),
            Region::Continuation => self.phi1_prime_at(x),
            Region::Intervention => self.params.lambda(),
        }
    }

    pub fn w2_prime(&self, x: f64) -> f64 {
        match self.region(x) {
            Region::Stopping => -self.params.b(),
            Region::Continuation => self.phi2_prime_at(x),
            Region::Intervention => -self.params.gamma(),
        }
    }

    /// Second derivative of `W1`; zero on the linear pieces.
    pub fn w1_second(&self, x: f64) -> f64 {
        match self.region(x) {
            Region::Continuation => self.phi1_second_at(x),
            _ => 0.0,
        }
    }

    pub fn w2_second(&self, x: f64) -> f64 {
        match self.region(x) {
            Region::Continuation => self.phi2_second_at(x),
            _ => 0.0,
        }
    }

    /// Optimal impulse size: the distance to the target below it, zero at
    /// and above it (a zero-size impulse would still cost `c`).
    pub fn delta(&self, x: f64) -> f64 {
        if x < self.x1_star {
            self.x1_star - x
        } else {
            0.0
        }
    }

    /// Controller's intervention operator `M W1(x) = W1(x + delta(x)) - c -
    /// lambda*|delta(x)|`.
    pub fn m_op(&self, x: f64) -> f64 {
        let delta = self.delta(x);
        self.w1(x + delta) - self.params.c() - self.params.lambda() * delta
    }

    /// Stopper's intervention operator `H W2(x) = W2(x + delta(x)) + d +
    /// gamma*|delta(x)|`.
    pub fn h_op(&self, x: f64) -> f64 {
        let delta = self.delta(x);
        self.w2(x + delta) + self.params.d() + self.params.gamma() * delta
    }
}
