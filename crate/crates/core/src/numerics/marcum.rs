//! First-order Marcum Q function.

use super::bessel::scaled_bessel_i_sequence;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Beyond `a*b` of this size the Bessel series would need too many terms;
/// a large-argument expansion around the Gaussian limit takes over.
const SERIES_MAX_PRODUCT: f64 = 1e6;

/// `exp(-UNDERFLOW_EXPONENT)` is below the smallest positive double.
const UNDERFLOW_EXPONENT: f64 = 750.0;

const TERM_RATIO_STOP: f64 = 1e-16;

/// `Q1(a, b) = P(R > b)` for `R = |a + X + iY|`, `X, Y ~ N(0, 1)`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
        return Err(Error::domain(format!(
            "marcum_q1: arguments must be finite and non-negative, got ({a}, {b})"
        )));
    }
    Ok(q1(a, b))
}

pub(crate) fn q1(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return (-0.5 * b * b).exp();
    }
    let gap = 0.5 * (a - b) * (a - b);
    if gap > UNDERFLOW_EXPONENT {
        return if b > a { 0.0 } else { 1.0 };
    }
    let z = a * b;
    if z > SERIES_MAX_PRODUCT {
        return q1_large(a, b);
    }

    // Q1 = e^{-(a-b)^2/2} sum_{k>=0} (a/b)^k e^{-ab} I_k(ab)              (a < b)
    // Q1 = 1 - e^{-(a-b)^2/2} sum_{k>=1} (b/a)^k e^{-ab} I_k(ab)          (a >= b)
    let below = a < b;
    let ratio = if below { a / b } else { b / a };
    let order = 30 + (10.0 * z.sqrt()).ceil() as usize;
    let scaled = scaled_bessel_i_sequence(z, order);
    let first = if below { 0 } else { 1 };
    let mut power = if below { 1.0 } else { ratio };
    let mut sum = 0.0;
    for ik in &scaled[first..] {
        let term = power * ik;
        sum += term;
        if term <= TERM_RATIO_STOP * sum {
            break;
        }
        power *= ratio;
    }
    let tail = (-gap).exp() * sum;
    if below {
        tail
    } else {
        (1.0 - tail).max(0.0)
    }
}

// Expand the Rician density around its Gaussian limit:
// f(x) ~ sqrt(x/a) phi(x - a) (1 + 1/(8ax)); integrating term by term from
// t = b - a gives the expression below with error O(a^-3).
fn q1_large(a: f64, b: f64) -> f64 {
    let t = b - a;
    let phi = (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    let upper = 0.5 * libm::erfc(t / std::f64::consts::SQRT_2);
    (upper + phi / (2.0 * a) - t * phi / (8.0 * a * a)).clamp(0.0, 1.0)
}
