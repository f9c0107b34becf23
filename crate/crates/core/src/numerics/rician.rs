//! Rician statistics: means, tails and the expected minimum of
//! independent Rician amplitudes.

use super::bessel::scaled_i0_i1;
use super::marcum::q1;
use super::quadrature;
use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// Relative tolerance of the expected-minimum quadrature.
pub const MIN_INTEGRAL_REL_TOL: f64 = 1e-6;

/// Integrand level below which the expected-minimum integral is truncated.
pub const TAIL_EPS: f64 = 1e-10;

const TRUNCATION_MULTIPLIERS: [f64; 4] = [6.0, 8.0, 10.0, 12.0];

/// Rician amplitude `|nu + sigma (X + iY)|` with `X, Y ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianParams {
    nu: f64,
    sigma: f64,
}

impl RicianParams {
    pub fn new(nu: f64, sigma: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::domain(format!("rician nu must be finite and >= 0, got {nu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain(format!("rician sigma must be finite and > 0, got {sigma}")));
        }
        Ok(Self { nu, sigma })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `P(R > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        q1(self.nu / self.sigma, x.max(0.0) / self.sigma)
    }
}

/// Laguerre function of degree 1/2 on the non-positive half-line:
/// `L(x) = e^{x/2} [(1 - x) I0(-x/2) - x I1(-x/2)]`.
pub fn laguerre_half(x: f64) -> Result<f64> {
    if !x.is_finite() || x > 0.0 {
        return Err(Error::domain(format!(
            "laguerre_half: argument must be finite and <= 0, got {x}"
        )));
    }
    let z = -0.5 * x;
    let (i0, i1) = scaled_i0_i1(z);
    Ok((1.0 + 2.0 * z) * i0 + 2.0 * z * i1)
}

/// Mean of a Rician amplitude, `sigma sqrt(pi/2) L_{1/2}(-nu^2 / (2 sigma^2))`.
pub fn rician_mean(p: RicianParams) -> Result<f64> {
    let k = p.nu / p.sigma;
    Ok(p.sigma * FRAC_PI_2.sqrt() * laguerre_half(-0.5 * k * k)?)
}

/// Upper integration limit: `min_j (nu_j + c sigma_j)` for the smallest
/// `c` in {6, 8, 10, 12} at which the product of tails drops below `eps`.
pub fn truncation_point(links: &[RicianParams], eps: f64) -> Result<f64> {
    if links.is_empty() {
        return Err(Error::domain("truncation_point: no links"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("truncation_point: eps must lie in (0, 1), got {eps}")));
    }
    let mut x0 = f64::INFINITY;
    for c in TRUNCATION_MULTIPLIERS {
        x0 = links
            .iter()
            .map(|l| l.nu + c * l.sigma)
            .fold(f64::INFINITY, f64::min);
        if product_of_tails(links, x0) < eps {
            break;
        }
    }
    Ok(x0)
}

/// `prod_j P(R_j > x)`.
pub fn product_of_tails(links: &[RicianParams], x: f64) -> f64 {
    let mut acc = 1.0;
    for l in links {
        acc *= l.tail(x);
        if acc == 0.0 {
            break;
        }
    }
    acc
}

/// `int_0^upper prod_j P(R_j > x) dx`.
pub fn truncated_product_integral(links: &[RicianParams], upper: f64, rel_tol: f64) -> f64 {
    quadrature::integrate(|x| product_of_tails(links, x), 0.0, upper, rel_tol)
}

/// `E[min_j R_j]` for independent Rician amplitudes, as the integral of the
/// product of their tail probabilities.
pub fn expected_min_rician(links: &[RicianParams]) -> Result<f64> {
    let x0 = truncation_point(links, TAIL_EPS)?;
    Ok(truncated_product_integral(links, x0, MIN_INTEGRAL_REL_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rp(nu: f64, sigma: f64) -> RicianParams {
        RicianParams::new(nu, sigma).unwrap()
    }

    // I0, I1 by power series for the oracle side.
    fn i_series(k: i32, z: f64) -> f64 {
        // k is 0 or 1, so k! = 1
        let mut term = (0.5 * z).powi(k);
        let mut sum = term;
        for m in 1..500 {
            term *= 0.25 * z * z / (m as f64 * (m + k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre_half(0.0).unwrap(), 1.0);
        let x = -1.0_f64;
        let oracle = (x / 2.0).exp() * ((1.0 - x) * i_series(0, -x / 2.0) - x * i_series(1, -x / 2.0));
        let got = laguerre_half(x).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-12);
        assert!((got - 1.4465).abs() < 1e-4);
        for &x in &[-0.01, -3.0, -17.0, -39.9, -40.1, -80.0] {
            let z: f64 = -x / 2.0;
            let oracle = (-z).exp() * ((1.0 + 2.0 * z) * i_series(0, z) + 2.0 * z * i_series(1, z));
            let got = laguerre_half(x).unwrap();
            assert!(((got - oracle) / oracle).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn laguerre_domain() {
        assert!(laguerre_half(1e-12).is_err());
        assert!(laguerre_half(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn laguerre_large_argument_tracks_rician_mean_asymptote() {
        // For nu >> sigma the Rician mean is nu + sigma^2/(2 nu) + O(nu^-3).
        let x = -50.0_f64;
        let nu = (-2.0 * x).sqrt(); // sigma = 1
        let asym = nu + 1.0 / (2.0 * nu) + 1.0 / (8.0 * nu * nu * nu);
        let got = (PI / 2.0).sqrt() * laguerre_half(x).unwrap();
        assert!(((got - asym) / asym).abs() < 1e-6);
    }

    #[test]
    fn rayleigh_mean() {
        let m = rician_mean(rp(0.0, 1.0)).unwrap();
        assert!((m - 1.2533141373155001).abs() < 1e-14);
    }

    #[test]
    fn params_validation() {
        assert!(RicianParams::new(-0.1, 1.0).is_err());
        assert!(RicianParams::new(0.0, 0.0).is_err());
        assert!(RicianParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn single_link_minimum_is_its_mean() {
        for &(nu, sigma) in &[(0.0, 1.0), (1.0, 2.0), (3.0, 0.5), (10.0, 1.0), (0.09, 0.03)] {
            let p = rp(nu, sigma);
            let a = expected_min_rician(&[p]).unwrap();
            let b = rician_mean(p).unwrap();
            assert!(((a - b) / b).abs() < 1e-6, "{nu} {sigma}: {a} vs {b}");
        }
    }

    #[test]
    fn degenerate_deterministic_limit() {
        let v = expected_min_rician(&[rp(1.0, 1e-6), rp(2.0, 1e-6)]).unwrap();
        assert!((v - 1.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn empty_links_rejected() {
        assert!(expected_min_rician(&[]).is_err());
        assert!(truncation_point(&[], 1e-8).is_err());
        assert!(truncation_point(&[rp(0.0, 1.0)], 0.0).is_err());
        assert!(truncation_point(&[rp(0.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn truncation_rayleigh() {
        let x0 = truncation_point(&[rp(0.0, 1.0)], 1e-8).unwrap();
        assert!(x0 <= 12.0);
        assert!(q1(0.0, x0) < 1e-8);
        // exp(-18) > 1e-8 rules out c = 6
        assert_eq!(x0, 8.0);
    }

    #[test]
    fn truncation_two_links() {
        let links = [rp(1.0, 1.0), rp(2.0, 1.0)];
        let x0 = truncation_point(&links, 1e-8).unwrap();
        assert!(q1(1.0, x0) * q1(2.0, x0) < 1e-8);
    }

    #[test]
    fn truncation_monotone_in_eps() {
        let links = [rp(0.3, 0.7), rp(2.0, 0.2), rp(0.0, 1.5)];
        let mut prev = f64::INFINITY;
        for &eps in &[1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 0.5] {
            let x0 = truncation_point(&links, eps).unwrap();
            assert!(x0 <= prev);
            prev = x0;
        }
    }
}
