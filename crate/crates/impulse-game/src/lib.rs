//! Threshold Nash equilibria of a nonzero-sum impulse-controller-versus-
//! stopper game on a scaled Brownian motion with linear payoffs.
//!
//! Player 1 pushes the state upward by costly impulses once it falls to a
//! lower threshold; Player 2 ends the game once the state reaches an upper
//! one. This crate solves for both equilibrium families in closed form up
//! to scalar root-finding, certifies candidates against the full
//! quasi-variational-inequality system on a grid, and cross-validates by
//! Monte Carlo simulation.
//!
//! ```
//! use impulse_game::scenario;
//! use impulse_game::type1::solve_type1;
//!
//! let p = scenario::builtin("type1-A").unwrap().params;
//! let eq = solve_type1(&p).unwrap();
//! assert!((eq.x2_bar - 34.84).abs() < 0.02);
//! ```
//!
//! A rendered guide lives in `book/`; its chapters double as the
//! [`book`] module so every snippet is compiled and run by `cargo test`.

pub mod cli;
pub mod model;
pub mod montecarlo;
pub mod payoffs;
pub mod qvi;
pub mod rootfind;
pub mod scenario;
pub mod type1;
pub mod type2;

pub mod book;
