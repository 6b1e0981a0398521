//! Experiment configuration files.

use std::path::{Path, PathBuf};

use endomarket_core::numeric::check_prices;
use endomarket_core::{BenefitFunction, MarketConfig, SolverSettings, ValuationDistribution};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub market: MarketSpec,
    pub benefit: BenefitSpec,
    #[serde(default)]
    pub distribution: DistributionSpec,
    pub prices: PriceSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub validate: ValidateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub user_mass: f64,
    pub budgets: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenefitSpec {
    Constant { q: f64 },
    Linear { c: f64 },
    Power { c: f64, s: f64 },
    SShaped { c: f64, a: f64, b: f64 },
}

impl From<BenefitSpec> for BenefitFunction {
    fn from(spec: BenefitSpec) -> Self {
        match spec {
            BenefitSpec::Constant { q } => BenefitFunction::Constant { q },
            BenefitSpec::Linear { c } => BenefitFunction::Linear { c },
            BenefitSpec::Power { c, s } => BenefitFunction::Power { c, s },
            BenefitSpec::SShaped { c, a, b } => BenefitFunction::SShaped { c, a, b },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform {
        #[serde(default = "one")]
        scale: f64,
    },
    Personalized {
        v_m: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for DistributionSpec {
    fn default() -> Self {
        DistributionSpec::Uniform { scale: 1.0 }
    }
}

impl From<DistributionSpec> for ValuationDistribution {
    fn from(spec: DistributionSpec) -> Self {
        match spec {
            DistributionSpec::Uniform { scale } => ValuationDistribution::Uniform { scale },
            DistributionSpec::Personalized { v_m } => ValuationDistribution::Personalized { v_m },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriceSpec {
    List(PriceList),
    Range(PriceRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceList {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl PriceSpec {
    pub fn prices(&self) -> Result<Vec<f64>, CliError> {
        match self {
            PriceSpec::List(l) => Ok(l.values.clone()),
            PriceSpec::Range(r) => {
                if r.count == 0 {
                    return Err(CliError::Config("price range needs count ≥ 1".into()));
                }
                if !(r.min > 0.0 && r.max >= r.min && r.max.is_finite()) {
                    return Err(CliError::Config("price range needs 0 < min ≤ max".into()));
                }
                if r.count == 1 {
                    return Ok(vec![r.min]);
                }
                let last = (r.count - 1) as f64;
                Ok((0..r.count)
                    .map(|i| {
                        let t = i as f64 / last;
                        match r.spacing {
                            Spacing::Linear => r.min + t * (r.max - r.min),
                            Spacing::Log => r.min * (r.max / r.min).powf(t),
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form when the instance has one, grid solver otherwise.
    #[default]
    Auto,
    Numeric,
    Analytic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_min_run: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuum_tolerance: Option<f64>,
    #[serde(default)]
    pub method: Method,
}

impl SolverSpec {
    pub fn settings(&self) -> SolverSettings {
        let d = SolverSettings::default();
        let tolerance = self.tolerance.unwrap_or(d.tolerance);
        SolverSettings {
            grid_points: self.grid_points.unwrap_or(d.grid_points),
            tolerance,
            refine_tolerance: self.refine_tolerance.unwrap_or(d.refine_tolerance),
            interval_min_run: self.interval_min_run.unwrap_or(d.interval_min_run),
            continuum_tolerance: self
                .continuum_tolerance
                .unwrap_or(d.continuum_tolerance.min(tolerance)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub n: usize,
    pub seeds: Vec<u64>,
    /// Largest accepted median distance between oracle and numeric sets.
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
}

fn default_oracle_tolerance() -> f64 {
    0.01
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    /// Shift applied to every closed-form equilibrium before comparison.
    /// Nonzero only in fixtures that check the validator catches errors.
    #[serde(default)]
    pub analytic_offset: f64,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }
}

/// A configuration checked against every model invariant.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub market: MarketConfig,
    pub benefit: BenefitFunction,
    pub distribution: ValuationDistribution,
    pub prices: Vec<f64>,
    pub settings: SolverSettings,
    pub method: Method,
    pub oracle: Option<OracleSpec>,
    pub analytic_offset: f64,
}

impl Experiment {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let prices = cfg.prices.prices()?;
        check_prices(&prices)?;
        let market =
            MarketConfig::new(cfg.market.user_mass, cfg.market.budgets.clone(), prices[0])?;
        let benefit = BenefitFunction::from(cfg.benefit);
        benefit.validate()?;
        let distribution = ValuationDistribution::from(cfg.distribution);
        distribution.validate()?;
        let settings = cfg.solver.settings();
        settings.validate()?;
        if let Some(o) = &cfg.oracle {
            if o.n == 0 || o.seeds.is_empty() {
                return Err(CliError::Config(
                    "oracle needs n ≥ 1 and at least one seed".into(),
                ));
            }
            if o.tolerance.is_nan() || o.tolerance <= 0.0 {
                return Err(CliError::Config("oracle tolerance must be positive".into()));
            }
        }
        if !cfg.validate.analytic_offset.is_finite() {
            return Err(CliError::Config("analytic_offset must be finite".into()));
        }
        Ok(Self {
            market,
            benefit,
            distribution,
            prices,
            settings,
            method: cfg.solver.method,
            oracle: cfg.oracle.clone(),
            analytic_offset: cfg.validate.analytic_offset,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
schema_version = 1

[market]
user_mass = 1.0
budgets = [1.0, 2.0, 3.0]

[benefit]
kind = "s_shaped"
c = 2.0
a = 5.0
b = 10.0

[distribution]
kind = "personalized"
v_m = 0.5

[prices]
min = 0.5
max = 8.0
count = 5
spacing = "log"

[solver]
tolerance = 0.004
method = "numeric"

[outputs]
csv_path = "out.csv"

[oracle]
n = 1000
seeds = [1, 2]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(
            cfg.benefit,
            BenefitSpec::SShaped {
                c: 2.0,
                a: 5.0,
                b: 10.0
            }
        );
        assert_eq!(
            cfg.distribution,
            DistributionSpec::Personalized { v_m: 0.5 }
        );
        assert_eq!(cfg.oracle.as_ref().unwrap().tolerance, 0.01);
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn log_prices() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        let p = cfg.prices.prices().unwrap();
        assert_eq!(p.len(), 5);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[4] - 8.0).abs() < 1e-12);
        assert!((p[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_fields() {
        let typo = SAMPLE.replace("v_m = 0.5", "vm = 0.5");
        assert!(matches!(
            ExperimentConfig::parse(&typo),
            Err(CliError::Config(_))
        ));
        let extra = SAMPLE.replace("[market]", "[market]\nbuyers = 3");
        assert!(ExperimentConfig::parse(&extra).is_err());
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let v2 = SAMPLE.replace("schema_version = 1", "schema_version = 2");
        assert!(ExperimentConfig::parse(&v2).is_err());
    }

    #[test]
    fn default_distribution_is_standard_uniform() {
        let text = r#"
schema_version = 1
market = { user_mass = 1.0, budgets = [1.0] }
benefit = { kind = "constant", q = 1.0 }
prices = { values = [1.0] }
"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.distribution, DistributionSpec::Uniform { scale: 1.0 });
        let exp = Experiment::from_config(&cfg).unwrap();
        assert_eq!(exp.settings, SolverSettings::default());
    }

    #[test]
    fn invariants_checked_before_solving() {
        let cfg =
            ExperimentConfig::parse(&SAMPLE.replace("[1.0, 2.0, 3.0]", "[3.0, 1.0]")).unwrap();
        assert!(Experiment::from_config(&cfg).is_err());
        let cfg = ExperimentConfig::parse(&SAMPLE.replace("v_m = 0.5", "v_m = 1.5")).unwrap();
        assert!(Experiment::from_config(&cfg).is_err());
    }
}
