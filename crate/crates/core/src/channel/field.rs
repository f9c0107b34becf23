use super::{standard_complex_normal, Position};
use crate::error::{Error, Result};
use crate::numerics::j0;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Diagonal loading added to the J0 covariance before factorisation.
pub const COVARIANCE_JITTER: f64 = 1e-10;

/// Small-scale fading of one link as a function of the robot position.
///
/// The field is a zero-mean CN(0, 1) process with covariance
/// `J0(2 pi |p - q| / lambda)`, realised lazily: every query is drawn from
/// the conditional distribution given all earlier queries, using an
/// incrementally grown Cholesky factor of the visited-point covariance.
#[derive(Debug, Clone)]
pub struct LinkFieldSampler {
    endpoint: Position,
    wavelength: f64,
    visited: Vec<(Position, Complex64)>,
    // Row i holds the i-th row of the lower Cholesky factor.
    chol: Vec<Vec<f64>>,
    // Whitened innovations, h = L z.
    whitened: Vec<Complex64>,
    rng: ChaCha8Rng,
}

impl LinkFieldSampler {
    pub fn new(endpoint: Position, wavelength: f64, rng: ChaCha8Rng) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::domain(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Self {
            endpoint,
            wavelength,
            visited: Vec::new(),
            chol: Vec::new(),
            whitened: Vec::new(),
            rng,
        })
    }

    pub fn endpoint(&self) -> Position {
        self.endpoint
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn visited(&self) -> &[(Position, Complex64)] {
        &self.visited
    }

    pub fn correlation(&self, a: &Position, b: &Position) -> f64 {
        j0(2.0 * PI * a.distance(b) / self.wavelength)
    }

    /// Complex gain at `p`; repeated queries return the stored value.
    pub fn sample_at(&mut self, p: Position) -> Result<Complex64> {
        if !p.is_finite() {
            return Err(Error::domain(format!("field query at non-finite position {p}")));
        }
        if let Some((_, h)) = self.visited.iter().find(|(q, _)| *q == p) {
            return Ok(*h);
        }

        let n = self.visited.len();
        let mut row = Vec::with_capacity(n + 1);
        for i in 0..n {
            let k = self.correlation(&p, &self.visited[i].0);
            let dot: f64 = row.iter().zip(&self.chol[i]).map(|(w, l)| w * l).sum();
            row.push((k - dot) / self.chol[i][i]);
        }
        let explained: f64 = row.iter().map(|w| w * w).sum();
        let pivot = (1.0 + COVARIANCE_JITTER - explained).max(COVARIANCE_JITTER).sqrt();
        let mean: Complex64 = row.iter().zip(&self.whitened).map(|(w, z)| z * *w).sum();

        let innovation = standard_complex_normal(&mut self.rng);
        let h = mean + innovation * pivot;

        row.push(pivot);
        self.chol.push(row);
        self.whitened.push(innovation);
        self.visited.push((p, h));
        Ok(h)
    }
}
