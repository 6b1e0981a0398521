//! Distributions of users' privacy valuations.

use alloc::vec::Vec;

use crate::error::{check_range, Result};

/// Mass of users who do not care about privacy at all.
pub const PERSONALIZED_ZERO_MASS: f64 = 0.107;
/// Cumulative mass at the upper end of the medium band, `F(v_M)`.
pub const PERSONALIZED_MEDIUM_CDF: f64 = 0.107 + 0.537;

/// A right-continuous cumulative distribution function.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValuationDistribution {
    /// Uniform on `[0, scale]`.
    Uniform { scale: f64 },
    /// Point mass at 0, then uniform on `(0, v_m]` and on `(v_m, 1]`.
    Personalized { v_m: f64 },
}

impl Default for ValuationDistribution {
    fn default() -> Self {
        ValuationDistribution::Uniform { scale: 1.0 }
    }
}

impl ValuationDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ValuationDistribution::Uniform { scale } => {
                check_range("scale", scale, scale > 0.0 && scale.is_finite())
            }
            ValuationDistribution::Personalized { v_m } => {
                check_range("v_m", v_m, v_m > 0.0 && v_m < 1.0)
            }
        }
    }

    /// Upper end of the support.
    pub fn upper(&self) -> f64 {
        match *self {
            ValuationDistribution::Uniform { scale } => scale,
            ValuationDistribution::Personalized { .. } => 1.0,
        }
    }

    /// Smallest `x` with `cdf(x) ≥ u`, for `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            ValuationDistribution::Uniform { scale } => u * scale,
            ValuationDistribution::Personalized { v_m } => {
                if u <= PERSONALIZED_ZERO_MASS {
                    0.0
                } else if u <= PERSONALIZED_MEDIUM_CDF {
                    v_m * (u - PERSONALIZED_ZERO_MASS)
                        / (PERSONALIZED_MEDIUM_CDF - PERSONALIZED_ZERO_MASS)
                } else {
                    v_m + (1.0 - v_m) * (u - PERSONALIZED_MEDIUM_CDF)
                        / (1.0 - PERSONALIZED_MEDIUM_CDF)
                }
            }
        }
    }
}

impl Cdf for ValuationDistribution {
    fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            ValuationDistribution::Uniform { scale } => (x / scale).min(1.0),
            ValuationDistribution::Personalized { v_m } => {
                if x >= 1.0 {
                    1.0
                } else if x <= v_m {
                    PERSONALIZED_ZERO_MASS
                        + (PERSONALIZED_MEDIUM_CDF - PERSONALIZED_ZERO_MASS) * x / v_m
                } else {
                    PERSONALIZED_MEDIUM_CDF
                        + (1.0 - PERSONALIZED_MEDIUM_CDF) * (x - v_m) / (1.0 - v_m)
                }
            }
        }
    }
}

/// Empirical CDF of a finite sample of valuations.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Self { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }
}

impl Cdf for EmpiricalCdf {
    fn cdf(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }
}

impl<T: Cdf + ?Sized> Cdf for &T {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
}
