//! The multiple-link mobility diversity algorithm.
//!
//! During exploration the robot moves along a fixed heading and, at each
//! stopping point, picks the next step length from `{ell_d, ell_u}` by
//! maximising an objective built from the first-order fading predictor
//! `h~ = rho h^ + sqrt(1 - rho^2) u`. Given the current estimate, each
//! predicted link gain is Rician, so
//!
//! - G1 is the expected minimum gain over the `L + 1` links, and
//! - G2 (default) is the product of the per-link Rician means, a cheap
//!   surrogate whose maximiser tracks G1's.
//!
//! After `K` stopping points the robot settles where the smallest measured
//! gain is largest.

use crate::channel::{estimate, link_gain, LinkFieldSampler, Position, ShadowingDraw};
use crate::error::{Error, Result};
use crate::numerics::{expected_min_rician, first_j0_zero, j0, one_minus_j0, rician_mean, RicianParams};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Default short step as a fraction of the wavelength.
pub const DEFAULT_ELL_D_FRACTION: f64 = 0.1;

/// Link identifier of the fusion center; cluster heads are `1..=N`.
pub const FC_LINK: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    G2,
    G1,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g2" => Ok(Objective::G2),
            "g1" => Ok(Objective::G1),
            other => Err(Error::Config(format!("unknown objective `{other}` (expected g1 or g2)"))),
        }
    }
}

/// Smallest displacement at which the J0 correlation vanishes.
pub fn decorrelation_step(wavelength: f64) -> f64 {
    wavelength * first_j0_zero() / (2.0 * PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub k_points: usize,
    pub l_links: usize,
    pub ell_d: f64,
    pub ell_u: f64,
    pub phi: f64,
    pub wavelength: f64,
    pub alpha: f64,
    pub objective: Objective,
}

impl PlannerConfig {
    /// `ell_d = 0.1 lambda`, `ell_u` at the first J0 zero, heading 0.
    pub fn new(k_points: usize, l_links: usize, wavelength: f64, alpha: f64) -> Self {
        Self {
            k_points,
            l_links,
            ell_d: DEFAULT_ELL_D_FRACTION * wavelength,
            ell_u: decorrelation_step(wavelength),
            phi: 0.0,
            wavelength,
            alpha,
            objective: Objective::G2,
        }
    }

    /// Every violated invariant, as human-readable messages.
    pub fn violations(&self, n_chs: usize) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            out.push(format!("wavelength must be positive (got {})", self.wavelength));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            out.push(format!("alpha must be positive (got {})", self.alpha));
        }
        if !self.phi.is_finite() {
            out.push("phi must be finite".to_string());
        }
        if self.k_points < 1 {
            out.push("k_points >= 1 violated".to_string());
        }
        if self.l_links < 1 || self.l_links > n_chs {
            out.push(format!(
                "1 <= l_links <= number of CHs violated (l_links = {}, CHs = {n_chs})",
                self.l_links
            ));
        }
        if !(self.ell_d > 0.0 && self.ell_d < self.ell_u) {
            out.push(format!(
                "0 < ell_d < ell_u violated (ell_d = {}, ell_u = {})",
                self.ell_d, self.ell_u
            ));
        }
        if self.wavelength > 0.0 {
            let expected = decorrelation_step(self.wavelength);
            if (self.ell_u - expected).abs() > 1e-9 * expected {
                out.push(format!(
                    "ell_u must equal the first J0 zero scaled by lambda/(2 pi) = {expected} (got {})",
                    self.ell_u
                ));
            }
        }
        out
    }

    pub fn validate(&self, n_chs: usize) -> Result<()> {
        match self.violations(n_chs).first() {
            None => Ok(()),
            Some(v) => Err(Error::Config(v.clone())),
        }
    }

    fn correlation(&self, step: f64) -> (f64, f64) {
        let arg = 2.0 * PI * step / self.wavelength;
        let rho = j0(arg).max(0.0);
        let one_minus_rho_sq = (one_minus_j0(arg) * (1.0 + rho)).min(1.0);
        (rho, one_minus_rho_sq)
    }
}

/// Planner view of one link during exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub id: usize,
    pub s: ShadowingDraw,
    pub dist: f64,
    pub h_hat: Complex64,
}

impl LinkState {
    pub fn new(id: usize, s: ShadowingDraw, dist: f64) -> Result<Self> {
        if !(dist.is_finite() && dist > 0.0) {
            return Err(Error::domain(format!("link {id}: distance must be positive, got {dist}")));
        }
        Ok(Self { id, s, dist, h_hat: Complex64::new(0.0, 0.0) })
    }

    /// Large-scale amplitude `s / d^(alpha/2)`.
    pub fn scale(&self, alpha: f64) -> f64 {
        self.s.linear() / self.dist.powf(0.5 * alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingRecord {
    pub index: usize,
    pub position: Position,
    pub gains: BTreeMap<usize, f64>,
}

impl StoppingRecord {
    pub fn min_gain(&self) -> f64 {
        self.gains.values().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The two positions reachable in one step: `ell_d` and `ell_u` along `phi`.
pub fn candidate_positions(p_now: Position, cfg: &PlannerConfig) -> [Position; 2] {
    [p_now.offset(cfg.ell_d, cfg.phi), p_now.offset(cfg.ell_u, cfg.phi)]
}

/// Rician law of the predicted gain `s |h~| / d^(alpha/2)` after a move of
/// `step` meters.
///
/// With `h^` the current estimate and CN(0, 1) fading,
/// `h~ | h^ ~ CN(rho h^, 1 - rho^2)`, hence `nu = c rho |h^|` and a
/// per-component scale `sigma = c sqrt((1 - rho^2) / 2)`, `c = s / d^(alpha/2)`.
pub fn predictor_params(link: &LinkState, step: f64, cfg: &PlannerConfig) -> Result<RicianParams> {
    if !(step > 0.0) || step > cfg.ell_u * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "step must lie in (0, ell_u = {}], got {step}",
            cfg.ell_u
        )));
    }
    let (rho, one_minus_rho_sq) = cfg.correlation(step);
    let c = link.scale(cfg.alpha);
    RicianParams::new(c * rho * link.h_hat.norm(), c * (0.5 * one_minus_rho_sq).sqrt())
}

fn link_params(links: &[LinkState], step: f64, cfg: &PlannerConfig) -> Result<Vec<RicianParams>> {
    if links.is_empty() {
        return Err(Error::domain("no links to plan for"));
    }
    links.iter().map(|l| predictor_params(l, step, cfg)).collect()
}

/// Product of the per-link predicted mean gains.
pub fn g2_value(links: &[LinkState], step: f64, cfg: &PlannerConfig) -> Result<f64> {
    link_params(links, step, cfg)?
        .into_iter()
        .try_fold(1.0, |acc, p| Ok(acc * rician_mean(p)?))
}

/// Expected minimum predicted gain over the links.
pub fn g1_value(links: &[LinkState], step: f64, cfg: &PlannerConfig) -> Result<f64> {
    expected_min_rician(&link_params(links, step, cfg)?)
}

pub fn objective_value(links: &[LinkState], step: f64, cfg: &PlannerConfig) -> Result<f64> {
    match cfg.objective {
        Objective::G2 => g2_value(links, step, cfg),
        Objective::G1 => g1_value(links, step, cfg),
    }
}

/// Chooses the next step length; ties go to `ell_u`.
pub fn plan_step(links: &[LinkState], cfg: &PlannerConfig) -> Result<f64> {
    let short = objective_value(links, cfg.ell_d, cfg)?;
    let long = objective_value(links, cfg.ell_u, cfg)?;
    Ok(if short > long { cfg.ell_d } else { cfg.ell_u })
}

fn measure<R: Rng + ?Sized>(
    index: usize,
    position: Position,
    links: &mut [LinkState],
    fields: &mut [LinkFieldSampler],
    cfg: &PlannerConfig,
    est_noise_var: f64,
    rng: &mut R,
) -> Result<StoppingRecord> {
    let mut gains = BTreeMap::new();
    for (link, field) in links.iter_mut().zip(fields.iter_mut()) {
        let h = field.sample_at(position)?;
        link.h_hat = estimate(h, est_noise_var, rng);
        gains.insert(link.id, link_gain(link.s, link.h_hat, link.dist, cfg.alpha)?);
    }
    Ok(StoppingRecord { index, position, gains })
}

/// Exploration phase: `K` stopping points starting at `start`.
///
/// `fields[i]` must realise the fading of `links[i]`.
pub fn run_exploration<R: Rng + ?Sized>(
    start: Position,
    links: &mut [LinkState],
    fields: &mut [LinkFieldSampler],
    cfg: &PlannerConfig,
    est_noise_var: f64,
    rng: &mut R,
) -> Result<Vec<StoppingRecord>> {
    if cfg.k_points < 1 {
        return Err(Error::domain("at least one stopping point is required"));
    }
    if links.is_empty() || links.len() != fields.len() {
        return Err(Error::domain(format!(
            "need one field per link (links = {}, fields = {})",
            links.len(),
            fields.len()
        )));
    }
    let mut records = Vec::with_capacity(cfg.k_points);
    let mut position = start;
    records.push(measure(1, position, links, fields, cfg, est_noise_var, rng)?);
    for index in 2..=cfg.k_points {
        let step = plan_step(links, cfg)?;
        position = position.offset(step, cfg.phi);
        records.push(measure(index, position, links, fields, cfg, est_noise_var, rng)?);
    }
    Ok(records)
}

/// Selection phase: the record with the largest minimum gain, earliest on ties.
pub fn select_position(records: &[StoppingRecord]) -> Result<&StoppingRecord> {
    let mut best: Option<&StoppingRecord> = None;
    for r in records {
        if best.is_none_or(|b| r.min_gain() > b.min_gain()) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::domain("no stopping points to select from"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bessel_j0;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn cfg() -> PlannerConfig {
        PlannerConfig::new(8, 2, 1.0, 2.0)
    }

    fn link(id: usize, s: f64, dist: f64, h: f64) -> LinkState {
        let mut l = LinkState::new(id, ShadowingDraw::new(s).unwrap(), dist).unwrap();
        l.h_hat = Complex64::new(h, 0.0);
        l
    }

    #[test]
    fn candidates() {
        let mut c = cfg();
        c.ell_d = 0.1;
        let [a, b] = candidate_positions(Position::new(0.0, 0.0), &c);
        assert_eq!(a, Position::new(0.1, 0.0));
        assert!((b.x - 0.38274).abs() < 1e-5 && b.y == 0.0);
        c.phi = FRAC_PI_2;
        let p = Position::new(2.0, -1.0);
        for (q, len) in candidate_positions(p, &c).iter().zip([c.ell_d, c.ell_u]) {
            assert!((q.x - 2.0).abs() < 1e-15);
            assert!((q.distance(&p) - len).abs() < 1e-15);
        }
    }

    #[test]
    fn predictor_at_decorrelation_step() {
        let c = cfg();
        let l = link(1, 1.5, 10.0, 0.8);
        let p = predictor_params(&l, c.ell_u, &c).unwrap();
        assert!(p.nu() < 1e-15);
        assert!((p.sigma() - 1.5 / 10.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn predictor_small_step_limit() {
        let c = cfg();
        let l = link(1, 1.0, 4.0, 2.0);
        let p = predictor_params(&l, 1e-9, &c).unwrap();
        assert!(p.sigma() < 1e-8 && p.sigma() > 0.0);
        assert!((p.nu() - 2.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn predictor_tenth_wavelength() {
        let c = cfg();
        let l = link(1, 1.0, 10.0, 1.0);
        let p = predictor_params(&l, 0.1, &c).unwrap();
        let rho = bessel_j0(0.2 * PI).unwrap();
        assert!((rho - 0.9037).abs() < 1e-4);
        assert!((p.nu() - rho / 10.0).abs() < 1e-15);
        assert!((p.nu() - 0.0904).abs() < 1e-4);
        let sigma = ((1.0 - rho * rho) / 2.0).sqrt() / 10.0;
        assert!((p.sigma() - sigma).abs() < 1e-15);
        assert!((p.sigma() - 0.0303).abs() < 1e-4);
    }

    #[test]
    fn predictor_rejects_long_steps() {
        let c = cfg();
        let l = link(1, 1.0, 10.0, 1.0);
        assert!(predictor_params(&l, c.ell_u * 1.01, &c).is_err());
        assert!(predictor_params(&l, 0.0, &c).is_err());
    }

    #[test]
    fn g2_single_link_rayleigh() {
        let c = cfg();
        let l = link(0, 2.0, 9.0, 0.4);
        let g = g2_value(&[l], c.ell_u, &c).unwrap();
        let want = (PI.sqrt() / 2.0) * 2.0 / 9.0;
        assert!(((g - want) / want).abs() < 1e-12);
    }

    #[test]
    fn g2_is_product_of_means() {
        let c = cfg();
        let links = [link(0, 1.2, 30.0, 0.7), link(2, 0.8, 55.0, 1.9)];
        let g = g2_value(&links, c.ell_d, &c).unwrap();
        let want: f64 = links
            .iter()
            .map(|l| rician_mean(predictor_params(l, c.ell_d, &c).unwrap()).unwrap())
            .product();
        assert!(((g - want) / want).abs() < 1e-14);
    }

    #[test]
    fn zero_estimates_prefer_long_step() {
        let mut c = cfg();
        let links = [link(0, 1.0, 30.0, 0.0), link(1, 1.0, 50.0, 0.0), link(2, 0.7, 20.0, 0.0)];
        assert!(g2_value(&links, c.ell_u, &c).unwrap() > g2_value(&links, c.ell_d, &c).unwrap());
        assert_eq!(plan_step(&links, &c).unwrap(), c.ell_u);
        c.objective = Objective::G1;
        assert_eq!(plan_step(&links, &c).unwrap(), c.ell_u);
    }

    #[test]
    fn strong_estimate_prefers_short_step() {
        let mut c = cfg();
        c.ell_d = 0.05;
        let links = [link(1, 1.0, 1.0, 3.0)];
        // rho(0.05 lambda) ~ 0.9755: nu ~ 2.93, mean ~ 2.93 versus a
        // Rayleigh mean of sqrt(pi)/2 ~ 0.886 after a decorrelating step.
        let short = g2_value(&links, c.ell_d, &c).unwrap();
        assert!((short - 2.93).abs() < 0.02, "{short}");
        assert_eq!(plan_step(&links, &c).unwrap(), c.ell_d);
        c.objective = Objective::G1;
        assert_eq!(plan_step(&links, &c).unwrap(), c.ell_d);
    }

    #[test]
    fn g1_single_link_equals_g2() {
        let c = cfg();
        let l = [link(1, 0.9, 12.0, 1.3)];
        for step in [c.ell_d, 0.2, c.ell_u] {
            let a = g1_value(&l, step, &c).unwrap();
            let b = g2_value(&l, step, &c).unwrap();
            assert!(((a - b) / b).abs() < 1e-6);
        }
    }

    #[test]
    fn g1_below_smallest_mean() {
        let c = cfg();
        let links = [link(0, 1.0, 40.0, 0.5), link(1, 1.1, 70.0, 1.5), link(3, 0.9, 50.0, 0.2)];
        for step in [c.ell_d, c.ell_u] {
            let g1 = g1_value(&links, step, &c).unwrap();
            let smallest = links
                .iter()
                .map(|l| rician_mean(predictor_params(l, step, &c).unwrap()).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(g1 <= smallest);
        }
    }

    #[test]
    fn empty_links_error() {
        let c = cfg();
        assert!(g1_value(&[], c.ell_d, &c).is_err());
        assert!(g2_value(&[], c.ell_d, &c).is_err());
        assert!(plan_step(&[], &c).is_err());
    }

    fn fields(n: usize, seed: u64) -> Vec<LinkFieldSampler> {
        (0..n)
            .map(|i| {
                LinkFieldSampler::new(
                    Position::new(100.0 * i as f64, 0.0),
                    1.0,
                    ChaCha8Rng::seed_from_u64(seed * 31 + i as u64),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn exploration_single_point() {
        let mut c = cfg();
        c.k_points = 1;
        let mut links = vec![link(0, 1.0, 30.0, 0.0), link(1, 1.0, 40.0, 0.0)];
        let mut f = fields(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let start = Position::new(5.0, 5.0);
        let recs = run_exploration(start, &mut links, &mut f, &c, 0.0, &mut rng).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].position, start);
        assert_eq!(recs[0].gains.len(), 2);
        assert_eq!(select_position(&recs).unwrap().index, 1);
    }

    #[test]
    fn exploration_path_shape() {
        let mut c = cfg();
        c.k_points = 12;
        c.phi = 0.7;
        for seed in 0..20 {
            let mut links = vec![link(0, 1.0, 30.0, 0.0), link(1, 1.0, 40.0, 0.0), link(2, 1.3, 45.0, 0.0)];
            let mut f = fields(3, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = Position::new(1.0, 2.0);
            let recs = run_exploration(start, &mut links, &mut f, &c, 0.0, &mut rng).unwrap();
            assert_eq!(recs.len(), 12);
            let mut total = 0.0;
            for (i, w) in recs.windows(2).enumerate() {
                assert_eq!(w[1].index, i + 2);
                let d = w[0].position.distance(&w[1].position);
                assert!((d - c.ell_d).abs() < 1e-12 || (d - c.ell_u).abs() < 1e-12);
                let heading = (w[1].position.y - w[0].position.y).atan2(w[1].position.x - w[0].position.x);
                assert!((heading - c.phi).abs() < 1e-9);
                total += d;
            }
            assert!(total <= 11.0 * c.ell_u + 1e-12);
            for r in &recs {
                assert_eq!(r.gains.keys().copied().collect::<Vec<_>>(), vec![0, 1, 2]);
            }
        }
    }

    fn record(index: usize, gains: &[f64]) -> StoppingRecord {
        StoppingRecord {
            index,
            position: Position::new(index as f64, 0.0),
            gains: gains.iter().copied().enumerate().collect(),
        }
    }

    #[test]
    fn selection_argmax_and_ties() {
        let recs = vec![record(1, &[0.2, 0.9]), record(2, &[0.7, 0.8]), record(3, &[0.4, 1.0])];
        assert_eq!(select_position(&recs).unwrap().index, 2);
        let tied = vec![record(1, &[0.5, 0.6]), record(2, &[0.9, 0.5])];
        assert_eq!(select_position(&tied).unwrap().index, 1);
        assert!(select_position(&[]).is_err());
    }

    #[test]
    fn config_violations() {
        let mut c = cfg();
        assert!(c.violations(3).is_empty());
        c.ell_d = c.ell_u;
        assert!(c.violations(3).iter().any(|v| v.contains("ell_d < ell_u")));
        let mut c = cfg();
        c.l_links = 4;
        assert!(c.validate(3).is_err());
    }
}
