//! Closed-form equilibria for a constant benefit `Q(α) = Q` under valuations
//! uniform on `[0, 1]`.

use alloc::vec::Vec;

use crate::equilibrium::{EquilibriumInterval, EquilibriumPoint, EquilibriumSet, Source};
use crate::error::{check_range, Error, Result};
use crate::market::MarketConfig;

/// Relative tolerance on `P` for recognizing the price `γ(K)` at which a
/// low-benefit market has a continuum of equilibria.
pub const MIXED_PRICE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantRegime {
    /// `Q ≥ K`: everybody participates at every price.
    High,
    /// `B_{≤K}/B_K ≤ Q < K`: one equilibrium per price, partial below a
    /// price threshold and full above it.
    Moderate,
    /// `Q < B_{≤K}/B_K`.
    Low,
}

/// Price thresholds of a constant-benefit market.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantThresholds {
    pub regime: ConstantRegime,
    /// `γ(k) = ((K−k)B_k + B_{≤k}) / (QN)` for `k = 0..=K`.
    pub gamma: Vec<f64>,
    /// `ξ(k) = B_k / N` for `k = 1..=K`, stored at index `k − 1`.
    /// `ξ(K+1)` is unbounded.
    pub xi: Vec<f64>,
    /// `P*(k) = B_{≤k} / (N(Q − (K−k)))` at index `k` for `k = 0..=K`;
    /// `None` at `k = 0` and wherever `Q ≤ K − k`.
    pub p_star: Vec<Option<f64>>,
    /// `k̄`, absent in the high regime.
    pub k_bar: Option<usize>,
    /// Price `P̄` at which full participation starts; absent in the high
    /// regime, where it starts at every price.
    pub p_threshold: Option<f64>,
}

pub fn classify_constant(config: &MarketConfig, q: f64) -> ConstantRegime {
    let k = config.num_buyers();
    let total: f64 = config.budgets().iter().sum();
    let b_max = config.budgets()[k - 1];
    if q >= k as f64 {
        ConstantRegime::High
    } else if q * b_max >= total {
        ConstantRegime::Moderate
    } else {
        ConstantRegime::Low
    }
}

/// Buyer threshold `k̄` separating partial from full participation.
///
/// The smallest `k` with `B_{≤k} > (Q − (K−k))B_k` and
/// `B_{≤k} ≤ (Q − (K−k))B_{k+1}`; always `K` in the low regime.
pub fn find_k_bar(config: &MarketConfig, q: f64) -> Result<usize> {
    check_range("q", q, q > 0.0)?;
    let kk = config.num_buyers();
    match classify_constant(config, q) {
        ConstantRegime::High => Err(Error::WrongRegime("k̄ is undefined when Q ≥ K")),
        ConstantRegime::Low => Ok(kk),
        ConstantRegime::Moderate => {
            let cum = config.prefix_sums();
            let b = config.budgets();
            (1..=kk)
                .find(|&k| {
                    let slack = q - (kk - k) as f64;
                    let partial = cum[k] > slack * b[k - 1];
                    let full = k == kk || cum[k] <= slack * b[k];
                    partial && full
                })
                .ok_or(Error::Invalid(
                    "no buyer threshold satisfies both conditions",
                ))
        }
    }
}

pub fn thresholds(config: &MarketConfig, q: f64) -> Result<ConstantThresholds> {
    check_range("q", q, q > 0.0 && q.is_finite())?;
    let kk = config.num_buyers();
    let n = config.user_mass();
    let b = config.budgets();
    let cum = config.prefix_sums();

    let gamma: Vec<f64> = (0..=kk)
        .map(|k| {
            let b_k = if k == 0 { 0.0 } else { b[k - 1] };
            ((kk - k) as f64 * b_k + cum[k]) / (q * n)
        })
        .collect();
    let xi = b.iter().map(|&bk| bk / n).collect();
    let p_star = (0..=kk)
        .map(|k| {
            let slack = q - (kk - k) as f64;
            (k > 0 && slack > 0.0).then(|| cum[k] / (n * slack))
        })
        .collect::<Vec<_>>();

    let regime = classify_constant(config, q);
    let (k_bar, p_threshold) = match regime {
        ConstantRegime::High => (None, None),
        ConstantRegime::Moderate => {
            let k = find_k_bar(config, q)?;
            (Some(k), p_star[k])
        }
        ConstantRegime::Low => (Some(kk), Some(gamma[kk])),
    };
    Ok(ConstantThresholds {
        regime,
        gamma,
        xi,
        p_star,
        k_bar,
        p_threshold,
    })
}

/// Every nontrivial equilibrium at `config.price()`.
pub fn solve_constant(config: &MarketConfig, q: f64) -> Result<EquilibriumSet> {
    let th = thresholds(config, q)?;
    let price = config.price();
    let mut set = EquilibriumSet::empty(price, Source::Analytic);
    match th.regime {
        ConstantRegime::High => set.points.push(EquilibriumPoint::at(config, 1.0)?),
        ConstantRegime::Moderate => {
            let p_bar = th
                .p_threshold
                .expect("moderate regime has a price threshold");
            if price >= p_bar {
                set.points.push(EquilibriumPoint::at(config, 1.0)?);
            } else {
                set.points.push(partial_point(config, q, &th.gamma)?);
            }
        }
        ConstantRegime::Low => {
            let kk = config.num_buyers();
            let g = th.gamma[kk];
            if (price - g).abs() <= MIXED_PRICE_RTOL * g {
                let total = config.budgets().iter().sum::<f64>();
                let lo = q * config.budgets()[kk - 1] / total;
                set.intervals.push(EquilibriumInterval::closed(lo, 1.0));
            } else if price > g {
                set.points.push(EquilibriumPoint::at(config, 1.0)?);
            } else {
                set.points.push(partial_point(config, q, &th.gamma)?);
            }
        }
    }
    Ok(set)
}

/// Partial equilibrium `α = (Q − B_{≤k}/(PN)) / (K−k)` on the price segment
/// `γ(k) < P ≤ γ(k+1)`.
fn partial_point(config: &MarketConfig, q: f64, gamma: &[f64]) -> Result<EquilibriumPoint> {
    let price = config.price();
    let kk = config.num_buyers();
    let k = gamma.partition_point(|&g| g < price).saturating_sub(1);
    if k >= kk {
        return Err(Error::Invalid("price lies above every partial segment"));
    }
    let spent = config.cumulative_budget(k)? / (price * config.user_mass());
    let alpha = ((q - spent) / (kk - k) as f64).min(1.0);
    let mut point = EquilibriumPoint::at(config, alpha)?;
    point.threshold = k;
    Ok(point)
}

/// Participation `min(1, Q/V)` when privacy costs do not depend on how much
/// data is sold. Independent of the price.
pub fn exogenous_constant(q: f64, scale: f64) -> Result<f64> {
    check_range("q", q, q >= 0.0)?;
    check_range("scale", scale, scale > 0.0)?;
    Ok((q / scale).min(1.0))
}
