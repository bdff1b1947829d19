//! Self-similar solutions of the time-fractional porous medium equation
//!
//! ```text
//! ∂_t^α u = (D(u) u_x)_x,   u(0, t) = M,   u(x, 0) = 0
//! ```
//!
//! With `η = x t^{-α/2}` the Caputo derivative becomes an Erdélyi-Kober
//! operator and the profile `U(η)` solves a nonlocal equation on the compact
//! support `[0, η*]`. This crate discretizes that operator by product
//! quadrature ([`ek`]), marches the profile backwards from the wetting front
//! and shoots on `η*` ([`solver`]), and reproduces convergence experiments
//! ([`analysis`]).
//!
//! ```
//! use ekpme::{DiffusivityModel, Rule, Solver, SolverConfig};
//!
//! let config = SolverConfig::new(0.5, 200, Rule::Trapezoid)?;
//! let outcome = Solver::new(config)?.shoot(1.0, &DiffusivityModel::power_law(1.0)?)?;
//! assert!(outcome.residual < 1e-8);
//! assert!(outcome.profile.is_monotone(1e-12));
//! # Ok::<(), ekpme::Error>(())
//! ```

// `!(x > 0.0)` guards are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod diffusivity;
pub mod ek;
pub mod error;
pub mod output;
pub mod quadrature;
mod roots;
pub mod solver;
pub mod special;

pub use diffusivity::{Admissibility, Diffusivity, DiffusivityModel, RegularizedModel};
pub use ek::{EkParams, EkWeightRow, EkWeightTable, Grid, RowStorage, Rule};
pub use error::{Error, Result};
pub use solver::{Profile, Regularization, ShootingOutcome, Solver, SolverConfig};
pub use special::{beta, gamma, incomplete_beta, SpecialFnConfig};
