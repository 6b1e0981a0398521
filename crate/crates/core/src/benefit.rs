//! Per-user benefit `Q(α)` as a function of the participation rate.

use crate::error::{check_range, Result};
use crate::special::regularized_incomplete_beta;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenefitFunction {
    /// `Q(α) = q`.
    Constant { q: f64 },
    /// `Q(α) = c·αN`.
    Linear { c: f64 },
    /// `Q(α) = c·(αN)^s` with `s ∈ [0, 1]`.
    Power { c: f64, s: f64 },
    /// `Q(α) = c·I_α(a, b)`.
    SShaped { c: f64, a: f64, b: f64 },
}

impl BenefitFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BenefitFunction::Constant { q } => check_range("q", q, q >= 0.0 && q.is_finite()),
            BenefitFunction::Linear { c } => check_range("c", c, c > 0.0 && c.is_finite()),
            BenefitFunction::Power { c, s } => {
                check_range("c", c, c > 0.0 && c.is_finite())?;
                check_range("s", s, (0.0..=1.0).contains(&s))
            }
            BenefitFunction::SShaped { c, a, b } => {
                check_range("c", c, c > 0.0 && c.is_finite())?;
                check_range("a", a, a > 0.0 && a.is_finite())?;
                check_range("b", b, b > 0.0 && b.is_finite())
            }
        }
    }

    /// Evaluates `Q(α)` for a population of mass `user_mass`.
    pub fn eval(&self, alpha: f64, user_mass: f64) -> Result<f64> {
        check_range("alpha", alpha, (0.0..=1.0).contains(&alpha))?;
        Ok(match *self {
            BenefitFunction::Constant { q } => q,
            BenefitFunction::Linear { c } => c * alpha * user_mass,
            // Exact at the endpoints so s = 0 and s = 1 coincide with the
            // constant and linear families.
            BenefitFunction::Power { c, s: 0.0 } => c,
            BenefitFunction::Power { c, s: 1.0 } => c * alpha * user_mass,
            BenefitFunction::Power { c, s } => c * libm::pow(alpha * user_mass, s),
            BenefitFunction::SShaped { c, a, b } => c * regularized_incomplete_beta(alpha, a, b)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_degenerates_exactly() {
        for n in [1.0, 7.0, 1000.0] {
            for i in 0..=100 {
                let a = i as f64 / 100.0;
                let p0 = BenefitFunction::Power { c: 1.3, s: 0.0 }
                    .eval(a, n)
                    .unwrap();
                let p1 = BenefitFunction::Power { c: 1.3, s: 1.0 }
                    .eval(a, n)
                    .unwrap();
                assert_eq!(p0, BenefitFunction::Constant { q: 1.3 }.eval(a, n).unwrap());
                assert_eq!(p1, BenefitFunction::Linear { c: 1.3 }.eval(a, n).unwrap());
            }
        }
    }

    #[test]
    fn s_shaped_endpoints() {
        let g = BenefitFunction::SShaped {
            c: 2.0,
            a: 5.0,
            b: 10.0,
        };
        assert_eq!(g.eval(0.0, 100.0).unwrap(), 0.0);
        assert_eq!(g.eval(1.0, 100.0).unwrap(), 2.0);
    }

    #[test]
    fn validation() {
        assert!(BenefitFunction::Constant { q: -1.0 }.validate().is_err());
        assert!(BenefitFunction::Constant { q: 0.0 }.validate().is_ok());
        assert!(BenefitFunction::Linear { c: 0.0 }.validate().is_err());
        assert!(BenefitFunction::Power { c: 1.0, s: 1.5 }
            .validate()
            .is_err());
        assert!(BenefitFunction::SShaped {
            c: 1.0,
            a: 0.0,
            b: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn nonnegative() {
        let fams = [
            BenefitFunction::Constant { q: 0.7 },
            BenefitFunction::Linear { c: 0.1 },
            BenefitFunction::Power { c: 0.4, s: 0.2 },
            BenefitFunction::SShaped {
                c: 3.0,
                a: 10.0,
                b: 5.0,
            },
        ];
        for f in fams {
            for i in 0..=50 {
                assert!(f.eval(i as f64 / 50.0, 10.0).unwrap() >= 0.0);
            }
        }
    }
}
