//! Bessel functions of integer order needed by the channel model and the
//! Rician statistics: J0 for the Jakes correlation and exponentially scaled
//! I_k for the Marcum Q and Laguerre evaluations.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

/// Above this argument J0 switches from Miller recurrence to the Hankel
/// asymptotic expansion (smallest asymptotic term ~ e^{-2x}).
const J0_ASYMPTOTIC_FROM: f64 = 25.0;

/// Above this argument I0/I1 use the large-argument expansion.
const I_ASYMPTOTIC_FROM: f64 = 20.0;

const RESCALE_ABOVE: f64 = 1e250;

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel_j0: non-finite argument {x}")));
    }
    Ok(j0(x))
}

pub(crate) fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        1.0
    } else if x <= J0_ASYMPTOTIC_FROM {
        j0_miller(x)
    } else {
        j0_hankel(x)
    }
}

// Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised with
// 1 = J_0 + 2 (J_2 + J_4 + ...).
fn j0_miller(x: f64) -> f64 {
    let start = x + 25.0 + 10.0 * x.cbrt();
    let mut n = 2 * ((start / 2.0).ceil() as usize);
    let mut above = 0.0_f64;
    let mut current = 1e-30_f64;
    let mut even_sum = 0.0_f64;
    while n > 0 {
        if n % 2 == 0 {
            even_sum += current;
        }
        let below = (2.0 * n as f64 / x) * current - above;
        above = current;
        current = below;
        n -= 1;
        if current.abs() > RESCALE_ABOVE {
            current /= RESCALE_ABOVE;
            above /= RESCALE_ABOVE;
            even_sum /= RESCALE_ABOVE;
        }
    }
    current / (current + 2.0 * even_sum)
}

fn j0_hankel(x: f64) -> f64 {
    // t_k = a_k(0) / x^k with a_k(0) = (-1)(1^2)(-1)(3^2).../(k! 8^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        // (-1)^{k/2} on even k, (-1)^{(k-1)/2} on odd k
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    let (s, c) = x.sin_cos();
    let cos_w = (c + s) * FRAC_1_SQRT_2;
    let sin_w = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_w - q * sin_w)
}

/// `1 - J0(x)` without cancellation for small `x`.
pub(crate) fn one_minus_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        // sum_{k>=1} (-1)^{k+1} (x^2/4)^k / (k!)^2
        let y = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..30 {
            term *= -y / (k * k) as f64;
            sum -= term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        1.0 - j0(x)
    }
}

/// First positive zero of J0, found by bisection on [2, 3].
pub fn first_j0_zero() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
        // J0(2) > 0 > J0(3)
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if j0(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Exponentially scaled modified Bessel functions `e^{-z} I_k(z)` for
/// `k = 0..=order`, `z >= 0`.
///
/// Miller backward recurrence normalised with `e^z = I_0 + 2 sum_k I_k`;
/// every term is positive so the result carries full relative precision.
pub(crate) fn scaled_bessel_i_sequence(z: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = order + 30 + (10.0 * z.sqrt()).ceil() as usize;
    let mut values = vec![0.0_f64; start + 2];
    values[start] = 1e-280;
    let mut norm = 0.0_f64;
    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 / z) * values[k] + values[k + 1];
        values[k - 1] = below;
        norm += 2.0 * values[k];
        if below > RESCALE_ABOVE {
            for v in values[k - 1..].iter_mut() {
                *v /= RESCALE_ABOVE;
            }
            norm /= RESCALE_ABOVE;
        }
    }
    norm += values[0];
    for (o, v) in out.iter_mut().zip(values.iter()) {
        *o = v / norm;
    }
    out
}

fn scaled_i_asymptotic(order: f64, z: f64) -> f64 {
    let mu = 4.0 * order * order;
    let mut sum = 1.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * z);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

/// `(e^{-z} I_0(z), e^{-z} I_1(z))` for `z >= 0`.
pub(crate) fn scaled_i0_i1(z: f64) -> (f64, f64) {
    if z > I_ASYMPTOTIC_FROM {
        (scaled_i_asymptotic(0.0, z), scaled_i_asymptotic(1.0, z))
    } else {
        let seq = scaled_bessel_i_sequence(z, 1);
        (seq[0], seq[1])
    }
}
