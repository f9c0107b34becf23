//! Channel model: geometry, lognormal shadowing, spatially correlated
//! small-scale fading, link gains and power control.

mod field;

pub use field::LinkFieldSampler;

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// The point `step` meters away along heading `phi` (radians).
    pub fn offset(&self, step: f64, phi: f64) -> Position {
        let (s, c) = phi.sin_cos();
        Position::new(self.x + step * c, self.y + step * s)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Linear-scale lognormal shadowing factor of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowingDraw(f64);

impl ShadowingDraw {
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::domain(format!("shadowing factor must be positive, got {s}")));
        }
        Ok(Self(s))
    }

    /// No shadowing, `s = 1`.
    pub const fn unit() -> Self {
        Self(1.0)
    }

    pub fn linear(&self) -> f64 {
        self.0
    }

    pub fn db(&self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// Draws `s = 10^(g/10)` with `g ~ N(0, var_db)`.
pub fn draw_shadowing<R: Rng + ?Sized>(var_db: f64, rng: &mut R) -> Result<ShadowingDraw> {
    if !(var_db.is_finite() && var_db > 0.0) {
        return Err(Error::domain(format!("shadowing variance must be positive, got {var_db}")));
    }
    let normal = Normal::new(0.0, var_db.sqrt()).map_err(|e| Error::domain(e.to_string()))?;
    let g: f64 = normal.sample(rng);
    Ok(ShadowingDraw(10f64.powf(g / 10.0)))
}

/// Circularly symmetric complex Gaussian with `E|h|^2 = 1`.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Channel estimate `h + e` with `e ~ CN(0, noise_var)`; exact when the
/// variance is zero (no randomness is consumed then).
pub fn estimate<R: Rng + ?Sized>(h: Complex64, noise_var: f64, rng: &mut R) -> Complex64 {
    if noise_var > 0.0 {
        h + standard_complex_normal(rng) * noise_var.sqrt()
    } else {
        h
    }
}

/// Amplitude gain `s |h| / d^(alpha/2)`.
pub fn link_gain(s: ShadowingDraw, h: Complex64, dist: f64, alpha: f64) -> Result<f64> {
    if !(dist.is_finite() && dist > 0.0) {
        return Err(Error::domain(format!("link distance must be positive, got {dist}")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("pathloss exponent must be positive, got {alpha}")));
    }
    Ok(s.linear() * h.norm() / dist.powf(0.5 * alpha))
}

/// Transmit power that delivers `p_ref` through a link of amplitude `gain`.
pub fn transmit_power(gain: f64, p_ref: f64) -> Result<f64> {
    if !(p_ref.is_finite() && p_ref > 0.0) {
        return Err(Error::domain(format!("reference power must be positive, got {p_ref}")));
    }
    if !gain.is_finite() || gain < 0.0 {
        return Err(Error::domain(format!("gain must be finite and >= 0, got {gain}")));
    }
    if gain == 0.0 {
        return Err(Error::Outage);
    }
    let power = p_ref / (gain * gain);
    if power.is_finite() {
        Ok(power)
    } else {
        Err(Error::Outage)
    }
}
