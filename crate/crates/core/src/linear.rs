//! Closed-form equilibria for a linear benefit `Q(α) = CαN` under valuations
//! uniform on `[0, 1]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::equilibrium::{EquilibriumInterval, EquilibriumPoint, EquilibriumSet, Source};
use crate::error::{check_range, Error, Result};
use crate::market::MarketConfig;

/// Relative tolerance for treating `CN` as equal to `K` (or to `V` in the
/// exogenous baseline).
pub const BOUNDARY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearRegime {
    /// `CN > K`.
    High,
    /// `CN = K` up to [`BOUNDARY_RTOL`].
    Special,
    /// `CN < K`.
    Low,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearThresholds {
    pub regime: LinearRegime,
    pub cn: f64,
    pub k_hat: Option<usize>,
    /// Coefficient of the partial branch `α = A/P`, present with `k̂`.
    pub a: Option<f64>,
    /// Fallback buyer threshold, only computed when `k̂` is absent.
    pub k_tilde: Option<usize>,
    /// Lowest price with a nontrivial equilibrium (low regime only).
    pub p_threshold: Option<f64>,
}

pub fn classify_linear(config: &MarketConfig, c: f64) -> LinearRegime {
    let cn = c * config.user_mass();
    let k = config.num_buyers() as f64;
    if (cn - k).abs() <= BOUNDARY_RTOL * k {
        LinearRegime::Special
    } else if cn > k {
        LinearRegime::High
    } else {
        LinearRegime::Low
    }
}

/// Candidate buyer thresholds `k > K − CN` with their slack `CN − (K−k) > 0`.
fn candidates(config: &MarketConfig, cn: f64) -> impl Iterator<Item = (usize, f64)> {
    let kk = config.num_buyers();
    (1..=kk).filter_map(move |k| {
        let slack = cn - (kk - k) as f64;
        (slack > 0.0).then_some((k, slack))
    })
}

fn low_regime_only(config: &MarketConfig, c: f64) -> Result<f64> {
    check_range("c", c, c > 0.0 && c.is_finite())?;
    if classify_linear(config, c) != LinearRegime::Low {
        return Err(Error::WrongRegime(
            "buyer thresholds are defined only when CN < K",
        ));
    }
    Ok(c * config.user_mass())
}

/// The buyer threshold `k̂` with `B_k < B_{≤k}/(CN − (K−k)) ≤ B_{k+1}` and the
/// partial-branch coefficient `A = B_{≤k̂} / (N(CN − (K−k̂)))`.
pub fn find_k_hat(config: &MarketConfig, c: f64) -> Result<Option<(usize, f64)>> {
    let cn = low_regime_only(config, c)?;
    let kk = config.num_buyers();
    let b = config.budgets();
    let cum = config.prefix_sums();
    Ok(candidates(config, cn)
        .find(|&(k, slack)| {
            let ratio = cum[k] / slack;
            b[k - 1] < ratio && (k == kk || ratio <= b[k])
        })
        .map(|(k, slack)| (k, cum[k] / (config.user_mass() * slack))))
}

/// Smallest `k > K − CN` with `B_{≤k}/(CN − (K−k)) ≤ B_{k+1}`.
pub fn find_k_tilde(config: &MarketConfig, c: f64) -> Result<Option<usize>> {
    let cn = low_regime_only(config, c)?;
    let kk = config.num_buyers();
    let b = config.budgets();
    let cum = config.prefix_sums();
    Ok(candidates(config, cn)
        .find(|&(k, slack)| k == kk || cum[k] / slack <= b[k])
        .map(|(k, _)| k))
}

pub fn linear_thresholds(config: &MarketConfig, c: f64) -> Result<LinearThresholds> {
    check_range("c", c, c > 0.0 && c.is_finite())?;
    let cn = c * config.user_mass();
    let regime = classify_linear(config, c);
    let mut th = LinearThresholds {
        regime,
        cn,
        k_hat: None,
        a: None,
        k_tilde: None,
        p_threshold: None,
    };
    if regime == LinearRegime::Low {
        match find_k_hat(config, c)? {
            Some((k, a)) => {
                th.k_hat = Some(k);
                th.a = Some(a);
                th.p_threshold = Some(a);
            }
            None => {
                let k = find_k_tilde(config, c)?.ok_or(Error::Invalid("no fallback threshold"))?;
                th.k_tilde = Some(k);
                th.p_threshold = Some(config.budgets()[k - 1] / config.user_mass());
            }
        }
    }
    Ok(th)
}

/// Every nontrivial equilibrium at `config.price()`.
pub fn solve_linear(config: &MarketConfig, c: f64) -> Result<EquilibriumSet> {
    let th = linear_thresholds(config, c)?;
    let price = config.price();
    let n = config.user_mass();
    let mut set = EquilibriumSet::empty(price, Source::Analytic);
    match th.regime {
        LinearRegime::High => set.points.push(EquilibriumPoint::at(config, 1.0)?),
        LinearRegime::Special => {
            set.near_boundary = th.cn != config.num_buyers() as f64;
            let cap = config.budgets()[0] / (price * n);
            let interval = if cap >= 1.0 {
                EquilibriumInterval {
                    lo: 0.0,
                    hi: 1.0,
                    lo_open: true,
                    hi_open: true,
                }
            } else {
                EquilibriumInterval {
                    lo: 0.0,
                    hi: cap,
                    lo_open: true,
                    hi_open: false,
                }
            };
            set.intervals.push(interval);
            set.points.push(EquilibriumPoint::at(config, 1.0)?);
        }
        LinearRegime::Low => match (th.k_hat, th.a) {
            (Some(k_hat), Some(a)) => {
                if price > a {
                    let mut partial = EquilibriumPoint::at(config, a / price)?;
                    partial.threshold = k_hat;
                    set.points.push(partial);
                }
                if price >= a {
                    set.points.push(EquilibriumPoint::at(config, 1.0)?);
                }
            }
            _ => {
                let k_tilde = th.k_tilde.ok_or(Error::Invalid("no fallback threshold"))?;
                return solve_low_without_k_hat(config, c, k_tilde);
            }
        },
    }
    Ok(set)
}

/// Low regime without a partial branch: full participation from
/// `P̄ = B_{k̃}/N` upward, nothing below.
///
/// At `P = P̄` itself full participation is reported only if it is feasible,
/// i.e. `CN² ≥ Σ_k N_k(1)`.
pub(crate) fn solve_low_without_k_hat(
    config: &MarketConfig,
    c: f64,
    k_tilde: usize,
) -> Result<EquilibriumSet> {
    let price = config.price();
    let n = config.user_mass();
    let p_bar = config.budgets()[k_tilde - 1] / n;
    let mut set = EquilibriumSet::empty(price, Source::Analytic);
    let include_full = if price > p_bar {
        true
    } else if price == p_bar {
        c * n * n >= config.buyer_demand(1.0)?.total()
    } else {
        false
    };
    if include_full {
        set.points.push(EquilibriumPoint::at(config, 1.0)?);
    }
    Ok(set)
}

/// Equilibria when privacy costs do not depend on how much data is sold.
/// Unlike [`EquilibriumSet`], `α = 0` is reported.
#[derive(Debug, Clone, PartialEq)]
pub struct ExogenousEquilibria {
    pub points: Vec<f64>,
    pub interval: Option<(f64, f64)>,
}

/// Fixed points of `α = min(1, CαN/V)`. Independent of the price.
pub fn exogenous_linear(c: f64, user_mass: f64, scale: f64) -> Result<ExogenousEquilibria> {
    check_range("c", c, c > 0.0)?;
    check_range("user_mass", user_mass, user_mass > 0.0)?;
    check_range("scale", scale, scale > 0.0)?;
    let cn = c * user_mass;
    Ok(if (cn - scale).abs() <= BOUNDARY_RTOL * scale {
        ExogenousEquilibria {
            points: Vec::new(),
            interval: Some((0.0, 1.0)),
        }
    } else if cn > scale {
        ExogenousEquilibria {
            points: vec![0.0, 1.0],
            interval: None,
        }
    } else {
        ExogenousEquilibria {
            points: vec![0.0],
            interval: None,
        }
    })
}
