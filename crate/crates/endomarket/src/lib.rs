//! Experiment runner for data-marketplace participation equilibria: TOML
//! configurations, CSV tables, SVG plots and the `endomarket` command line.

pub mod config;
pub mod output;
pub mod plot;
pub mod run;

use rayon::prelude::*;

use endomarket_core::numeric::{check_prices, sweep_row};
use endomarket_core::{
    BenefitFunction, MarketConfig, SolverSettings, SweepResult, ValuationDistribution,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<endomarket_core::Error> for CliError {
    fn from(e: endomarket_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Price sweep with prices solved in parallel; rows stay in price order.
pub fn par_sweep(
    template: &MarketConfig,
    benefit: &BenefitFunction,
    dist: &ValuationDistribution,
    prices: &[f64],
    settings: &SolverSettings,
) -> endomarket_core::Result<SweepResult> {
    check_prices(prices)?;
    let rows = prices
        .par_iter()
        .map(|&p| sweep_row(template, benefit, dist, p, settings))
        .collect::<endomarket_core::Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use endomarket_core::numeric::sweep;

    #[test]
    fn parallel_sweep_matches_sequential() {
        let m = MarketConfig::new(1.0, vec![1.0, 2.0], 1.0).unwrap();
        let b = BenefitFunction::Power { c: 0.8, s: 0.5 };
        let d = ValuationDistribution::Personalized { v_m: 0.3 };
        let prices: Vec<f64> = (1..=12).map(|i| i as f64 * 0.5).collect();
        let s = SolverSettings::default();
        assert_eq!(
            par_sweep(&m, &b, &d, &prices, &s).unwrap(),
            sweep(&m, &b, &d, &prices, &s).unwrap()
        );
    }
}
