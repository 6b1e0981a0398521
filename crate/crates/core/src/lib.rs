//! Participation equilibria of a two-sided data marketplace in which users'
//! privacy costs depend on how much of their data downstream buyers purchase.
//!
//! A platform posts a price `P` per unit mass of data. `K` budget-constrained
//! buyers each buy `min(αN, B_k / P)`, and a user with privacy valuation `v`
//! joins iff `Q(α) - v · Σ_k N_k / (αN) ≥ 0`. A participation rate `α > 0` is
//! an equilibrium iff `α = F(αN·Q(α) / Σ_k N_k)`.
//!
//! The crate provides
//!
//! * the model primitives and the single-variable equilibrium residual
//!   ([`market`], [`benefit`], [`distribution`], [`special`]),
//! * closed-form solvers for constant and linear benefits under uniform
//!   valuations ([`constant`], [`linear`]),
//! * a distribution- and benefit-agnostic grid/bisection solver plus a
//!   finite-agent empirical oracle ([`numeric`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod benefit;
pub mod constant;
pub mod distribution;
pub mod equilibrium;
mod error;
pub mod linear;
pub mod market;
pub mod numeric;
pub mod special;

pub use benefit::BenefitFunction;
pub use distribution::{Cdf, EmpiricalCdf, ValuationDistribution};
pub use equilibrium::{EquilibriumInterval, EquilibriumPoint, EquilibriumSet, Regime, Source};
pub use error::{Error, Result};
pub use market::{BuyerAllocation, MarketConfig};
pub use numeric::{SolverSettings, SweepResult, SweepRow};

/// Closed-form equilibria when the instance is one of the analytically
/// characterized cases: a constant or linear benefit (or a power benefit with
/// exponent 0 or 1) under valuations uniform on `[0, 1]`.
///
/// Returns `None` for every other combination.
pub fn analytic_equilibria(
    config: &MarketConfig,
    benefit: &BenefitFunction,
    dist: &ValuationDistribution,
) -> Option<Result<EquilibriumSet>> {
    match dist {
        ValuationDistribution::Uniform { scale } if *scale == 1.0 => {}
        _ => return None,
    }
    match *benefit {
        BenefitFunction::Constant { q } if q > 0.0 => Some(constant::solve_constant(config, q)),
        BenefitFunction::Linear { c } => Some(linear::solve_linear(config, c)),
        BenefitFunction::Power { c, s: 0.0 } => Some(constant::solve_constant(config, c)),
        BenefitFunction::Power { c, s: 1.0 } => Some(linear::solve_linear(config, c)),
        _ => None,
    }
}
