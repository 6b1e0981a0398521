//! Regularized incomplete beta function.

use crate::error::{check_range, Error, Result};

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;

/// `I_x(a, b) = B(x; a, b) / B(a, b)`.
///
/// Continued fraction (modified Lentz) on whichever of `I_x(a, b)` and
/// `1 − I_{1−x}(b, a)` converges faster.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_range("a", a, a > 0.0 && a.is_finite())?;
    check_range("b", b, b > 0.0 && b.is_finite())?;
    check_range("x", x, (0.0..=1.0).contains(&x))?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }

    let ln_front = a * libm::log(x) + b * libm::log1p(-x) - ln_beta(a, b);
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        libm::exp(ln_front) * continued_fraction(x, a, b)? / a
    } else {
        1.0 - libm::exp(ln_front) * continued_fraction(1.0 - x, b, a)? / b
    };
    Ok(value.clamp(0.0, 1.0))
}

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

fn clamp_tiny(v: f64) -> f64 {
    if v.abs() < TINY {
        TINY
    } else {
        v
    }
}

fn continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 / clamp_tiny(1.0 - qab * x / qap);
    let mut h = d;

    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp_tiny(1.0 + aa * d);
        c = clamp_tiny(1.0 + aa / c);
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp_tiny(1.0 + aa * d);
        c = clamp_tiny(1.0 + aa / c);
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence("incomplete beta continued fraction"))
}
