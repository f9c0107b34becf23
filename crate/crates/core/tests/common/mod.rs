#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// One Rician amplitude `|nu + sigma (X + iY)|`, straight from the definition.
pub fn sample_rician<R: Rng>(nu: f64, sigma: f64, rng: &mut R) -> f64 {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    Complex64::new(nu + sigma * x, sigma * y).norm()
}

/// Monte-Carlo mean of `min_j R_j` for independent Rician amplitudes.
pub fn mc_min_rician<R: Rng>(links: &[(f64, f64)], trials: usize, rng: &mut R) -> f64 {
    let mut sum = 0.0;
    for _ in 0..trials {
        let m = links
            .iter()
            .map(|&(nu, s)| sample_rician(nu, s, rng))
            .fold(f64::INFINITY, f64::min);
        sum += m;
    }
    sum / trials as f64
}

/// `e^{-z} I0(z)` by the trapezoid rule on `(1/pi) int_0^pi e^{z (cos t - 1)} dt`.
pub fn scaled_i0_trapezoid(z: f64) -> f64 {
    let n = 200;
    let h = std::f64::consts::PI / n as f64;
    let mut s = 0.5 * (1.0 + (-2.0 * z).exp());
    for i in 1..n {
        s += (z * ((i as f64 * h).cos() - 1.0)).exp();
    }
    s / n as f64
}

/// `P(R > b)` for a Rician with `nu = a`, unit scale, by composite Simpson
/// integration of the density.
pub fn marcum_q1_by_density(a: f64, b: f64) -> f64 {
    let density = |x: f64| x * (-0.5 * (x - a) * (x - a)).exp() * scaled_i0_trapezoid(a * x);
    let upper = a.max(b) + 12.0;
    let n = ((upper - b) / 0.002).ceil() as usize;
    let n = (n + n % 2).max(2);
    let h = (upper - b) / n as f64;
    let mut s = density(b) + density(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * density(b + i as f64 * h);
    }
    s * h / 3.0
}

/// Sample correlation `Re E[h_i conj(h_j)] / sqrt(E|h_i|^2 E|h_j|^2)`.
pub fn correlation_matrix(samples: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let n = samples[0].len();
    let mut cross = vec![vec![0.0; n]; n];
    for s in samples {
        for i in 0..n {
            for j in 0..n {
                cross[i][j] += (s[i] * s[j].conj()).re;
            }
        }
    }
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = cross[i][j] / (cross[i][i] * cross[j][j]).sqrt();
        }
    }
    out
}
