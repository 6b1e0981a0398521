//! Market configuration, buyer demand and the equilibrium residual.

use alloc::vec::Vec;

use crate::benefit::BenefitFunction;
use crate::distribution::Cdf;
use crate::error::{check_alpha, check_range, Error, Result};

/// User mass `N`, buyer budgets `B_1 ≤ … ≤ B_K` and platform price `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketConfig {
    user_mass: f64,
    budgets: Vec<f64>,
    price: f64,
}

/// Data bought by each buyer at a given participation rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BuyerAllocation {
    /// `N_k = min(αN, B_k / P)`, nondecreasing in `k`.
    pub per_buyer: Vec<f64>,
    /// Number of budget-constrained buyers `k*`.
    pub threshold: usize,
    /// Mass `αN` of data on offer.
    pub available: f64,
}

impl BuyerAllocation {
    pub fn total(&self) -> f64 {
        self.per_buyer.iter().sum()
    }
}

impl MarketConfig {
    pub fn new(user_mass: f64, budgets: Vec<f64>, price: f64) -> Result<Self> {
        check_range(
            "user_mass",
            user_mass,
            user_mass > 0.0 && user_mass.is_finite(),
        )?;
        check_range("price", price, price > 0.0 && price.is_finite())?;
        if budgets.is_empty() {
            return Err(Error::Invalid("at least one buyer budget is required"));
        }
        for &b in &budgets {
            check_range("budget", b, b > 0.0 && b.is_finite())?;
        }
        if budgets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid("budgets must be sorted nondecreasing"));
        }
        Ok(Self {
            user_mass,
            budgets,
            price,
        })
    }

    /// Same market at a different price.
    pub fn with_price(&self, price: f64) -> Result<Self> {
        check_range("price", price, price > 0.0 && price.is_finite())?;
        Ok(Self {
            price,
            ..self.clone()
        })
    }

    pub fn user_mass(&self) -> f64 {
        self.user_mass
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn num_buyers(&self) -> usize {
        self.budgets.len()
    }

    /// `B_k` for `k` in `0..=K+1` with `B_0 = 0`. `Some(None)` stands for the
    /// unbounded sentinel `B_{K+1}`; indices past `K+1` return `None`.
    pub fn budget(&self, k: usize) -> Option<Option<f64>> {
        let kk = self.budgets.len();
        match k {
            0 => Some(Some(0.0)),
            k if k <= kk => Some(Some(self.budgets[k - 1])),
            k if k == kk + 1 => Some(None),
            _ => None,
        }
    }

    /// `B_{≤m}`, the sum of the `m` smallest budgets.
    pub fn cumulative_budget(&self, m: usize) -> Result<f64> {
        if m > self.budgets.len() {
            return Err(Error::Domain {
                name: "m",
                value: m as f64,
            });
        }
        Ok(self.budgets[..m].iter().sum())
    }

    pub(crate) fn prefix_sums(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.budgets.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for &b in &self.budgets {
            acc += b;
            out.push(acc);
        }
        out
    }

    pub fn buyer_demand(&self, alpha: f64) -> Result<BuyerAllocation> {
        check_alpha(alpha)?;
        Ok(self.demand_unchecked(alpha))
    }

    fn demand_unchecked(&self, alpha: f64) -> BuyerAllocation {
        let available = alpha * self.user_mass;
        let mut threshold = 0;
        let per_buyer = self
            .budgets
            .iter()
            .map(|&b| {
                let affordable = b / self.price;
                if affordable < available {
                    threshold += 1;
                    affordable
                } else {
                    available
                }
            })
            .collect();
        BuyerAllocation {
            per_buyer,
            threshold,
            available,
        }
    }

    fn total_demand(&self, alpha: f64) -> f64 {
        let available = alpha * self.user_mass;
        self.budgets
            .iter()
            .map(|&b| (b / self.price).min(available))
            .sum()
    }

    /// Expected number of buyers that receive a given participant's data.
    pub fn expected_purchases(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.total_demand(alpha) / (alpha * self.user_mass))
    }

    pub fn expected_cost(&self, v: f64, alpha: f64) -> Result<f64> {
        check_range("v", v, (0.0..=1.0).contains(&v))?;
        Ok(v * self.expected_purchases(alpha)?)
    }

    /// Utility of participating for a user with valuation `v`.
    pub fn user_utility(&self, v: f64, benefit: &BenefitFunction, alpha: f64) -> Result<f64> {
        let cost = self.expected_cost(v, alpha)?;
        Ok(benefit.eval(alpha, self.user_mass)? - cost)
    }

    /// Largest valuation that still participates at rate `alpha`.
    pub fn threshold_valuation(&self, benefit: &BenefitFunction, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let q = benefit.eval(alpha, self.user_mass)?;
        Ok(alpha * self.user_mass * q / self.total_demand(alpha))
    }

    /// `α − F(t(α))`; zero exactly at participation equilibria.
    pub fn residual<D: Cdf + ?Sized>(
        &self,
        benefit: &BenefitFunction,
        dist: &D,
        alpha: f64,
    ) -> Result<f64> {
        let t = self.threshold_valuation(benefit, alpha)?;
        Ok(alpha - dist.cdf(t))
    }
}
