//! Network topology and the per-coherence-block round: the fusion center
//! picks the `L` cluster heads with the weakest direct links, the robot
//! runs the MDA for those links plus its own link to the fusion center,
//! and every node sets its transmit power to meet the reference level.

use crate::channel::{
    draw_shadowing, link_gain, standard_complex_normal, transmit_power, LinkFieldSampler, Position,
    ShadowingDraw,
};
use crate::error::{Error, Result};
use crate::planner::{run_exploration, select_position, LinkState, PlannerConfig, FC_LINK};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Minimum node separation, in wavelengths, for the links to count as
/// independently faded.
pub const MIN_SEPARATION_WAVELENGTHS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Ch(usize),
    Mr,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Ch(id) => write!(f, "CH{id}"),
            Node::Mr => write!(f, "MR"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub fc: Position,
    /// CH `j` (1-based id) sits at `chs[j - 1]`.
    pub chs: Vec<Position>,
    pub mr_start: Position,
    pub roi: (f64, f64),
}

impl Default for Topology {
    fn default() -> Self {
        Self {
            fc: Position::new(60.0, 115.0),
            chs: vec![
                Position::new(10.0, 10.0),
                Position::new(60.0, 15.0),
                Position::new(110.0, 40.0),
            ],
            mr_start: Position::new(60.0, 60.0),
            roi: (120.0, 120.0),
        }
    }
}

impl Topology {
    pub fn n_chs(&self) -> usize {
        self.chs.len()
    }

    pub fn ch_ids(&self) -> impl Iterator<Item = usize> + '_ {
        1..=self.chs.len()
    }

    pub fn ch(&self, id: usize) -> Option<Position> {
        id.checked_sub(1).and_then(|i| self.chs.get(i)).copied()
    }

    pub fn violations(&self, wavelength: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.chs.is_empty() {
            out.push("topology needs at least one CH".to_string());
        }
        let all = std::iter::once(self.fc).chain(self.chs.iter().copied()).chain([self.mr_start]);
        if all.clone().any(|p| !p.is_finite()) {
            out.push("all positions must be finite".to_string());
        }
        let (w, h) = self.roi;
        if !(w > 0.0 && h > 0.0) {
            out.push(format!("roi must have positive size (got {w} x {h})"));
        }
        let p = self.mr_start;
        if !(p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h) {
            out.push(format!("mr_start {p} must lie inside the {w} x {h} roi"));
        }
        let min_sep = MIN_SEPARATION_WAVELENGTHS * wavelength;
        for (i, a) in self.chs.iter().enumerate() {
            let d = a.distance(&self.fc);
            if !(d >= min_sep) {
                out.push(format!(
                    "CH{}-to-FC distance {d} m must be >> wavelength (>= {min_sep} m)",
                    i + 1
                ));
            }
            for (j, b) in self.chs.iter().enumerate().skip(i + 1) {
                let d = a.distance(b);
                if !(d >= min_sep) {
                    out.push(format!(
                        "CH{}-to-CH{} distance {d} m must be >> wavelength (>= {min_sep} m)",
                        i + 1,
                        j + 1
                    ));
                }
            }
            if a.distance(&self.mr_start) == 0.0 {
                out.push(format!("CH{} coincides with mr_start", i + 1));
            }
        }
        if self.fc.distance(&self.mr_start) == 0.0 {
            out.push("FC coincides with mr_start".to_string());
        }
        out
    }
}

/// Radio-level parameters shared by every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub wavelength: f64,
    pub alpha: f64,
    /// Reference received power, watts.
    pub p_ref: f64,
    /// Variance of `10 log10(s)`; zero disables shadowing.
    pub shadow_var_db: f64,
    /// Variance of additive CN noise on channel estimates.
    pub est_noise_var: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { wavelength: 0.125, alpha: 2.0, p_ref: 1e-6, shadow_var_db: 1.0, est_noise_var: 0.0 }
    }
}

impl ChannelConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [("wavelength", self.wavelength), ("alpha", self.alpha), ("p_ref", self.p_ref)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be positive (got {v})"));
            }
        }
        for (name, v) in [("shadow_var_db", self.shadow_var_db), ("est_noise_var", self.est_noise_var)] {
            if !(v.is_finite() && v >= 0.0) {
                out.push(format!("{name} must be >= 0 (got {v})"));
            }
        }
        out
    }

    fn shadowing<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ShadowingDraw> {
        if self.shadow_var_db > 0.0 {
            draw_shadowing(self.shadow_var_db, rng)
        } else {
            Ok(ShadowingDraw::unit())
        }
    }
}

/// Result of one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub selected_chs: BTreeSet<usize>,
    pub mr_position: Position,
    /// Index of the chosen stopping point (1-based).
    pub stop_index: usize,
    /// Power of every CH over the link it actually uses.
    pub ch_power: BTreeMap<usize, f64>,
    /// Amplitude gain of the link each CH uses (relay or direct).
    pub ch_gain: BTreeMap<usize, f64>,
    pub mr_power: f64,
    pub mr_gain: f64,
    pub direct_gains: BTreeMap<usize, f64>,
    pub min_gain_selected: f64,
    /// Some link had zero gain; its power is infinite.
    pub outage: bool,
}

impl TrialOutcome {
    pub fn power(&self, node: Node) -> Option<f64> {
        match node {
            Node::Ch(id) => self.ch_power.get(&id).copied(),
            Node::Mr => Some(self.mr_power),
        }
    }
}

/// The `l_links` CHs with the smallest direct gains, lower id first on ties.
pub fn fc_select_chs(direct_gains: &BTreeMap<usize, f64>, l_links: usize) -> Result<BTreeSet<usize>> {
    if l_links == 0 || l_links > direct_gains.len() {
        return Err(Error::domain(format!(
            "cannot select {l_links} of {} CHs",
            direct_gains.len()
        )));
    }
    let mut order: Vec<(usize, f64)> = direct_gains.iter().map(|(k, v)| (*k, *v)).collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(order.into_iter().take(l_links).map(|(id, _)| id).collect())
}

fn power_or_outage(gain: f64, p_ref: f64, outage: &mut bool) -> Result<f64> {
    match transmit_power(gain, p_ref) {
        Ok(p) => Ok(p),
        Err(Error::Outage) => {
            *outage = true;
            Ok(f64::INFINITY)
        }
        Err(e) => Err(e),
    }
}

/// Simulates one coherence block.
pub fn run_block<R: Rng + ?Sized>(
    topo: &Topology,
    cfg: &PlannerConfig,
    channel: &ChannelConfig,
    rng: &mut R,
) -> Result<TrialOutcome> {
    // Direct CH -> FC links: both ends fixed, one fading scalar each.
    let mut direct_gains = BTreeMap::new();
    for (id, q) in topo.ch_ids().zip(&topo.chs) {
        let s = channel.shadowing(rng)?;
        let h = standard_complex_normal(rng);
        direct_gains.insert(id, link_gain(s, h, q.distance(&topo.fc), channel.alpha)?);
    }
    let selected = fc_select_chs(&direct_gains, cfg.l_links)?;

    let endpoints: Vec<(usize, Position)> = std::iter::once((FC_LINK, topo.fc))
        .chain(selected.iter().map(|&id| (id, topo.chs[id - 1])))
        .collect();
    let mut links = Vec::with_capacity(endpoints.len());
    let mut fields = Vec::with_capacity(endpoints.len());
    for &(id, q) in &endpoints {
        let s = channel.shadowing(rng)?;
        links.push(LinkState::new(id, s, topo.mr_start.distance(&q))?);
        let stream = ChaCha8Rng::seed_from_u64(rng.random());
        fields.push(LinkFieldSampler::new(q, channel.wavelength, stream)?);
    }

    let records = run_exploration(topo.mr_start, &mut links, &mut fields, cfg, channel.est_noise_var, rng)?;
    let chosen = select_position(&records)?;
    let mr_position = chosen.position;
    let stop_index = chosen.index;

    let mut outage = false;
    let mut ch_power = BTreeMap::new();
    let mut ch_gain = BTreeMap::new();
    let mut mr_gain = 0.0;
    let mut min_gain_selected = f64::INFINITY;
    for (link, field) in links.iter().zip(fields.iter_mut()) {
        let h = field.sample_at(mr_position)?;
        let g = link_gain(link.s, h, link.dist, channel.alpha)?;
        min_gain_selected = min_gain_selected.min(g);
        if link.id == FC_LINK {
            mr_gain = g;
        } else {
            ch_gain.insert(link.id, g);
        }
    }
    let mr_power = power_or_outage(mr_gain, channel.p_ref, &mut outage)?;
    for (&id, &g) in &direct_gains {
        ch_gain.entry(id).or_insert(g);
    }
    for (&id, &g) in &ch_gain {
        ch_power.insert(id, power_or_outage(g, channel.p_ref, &mut outage)?);
    }

    Ok(TrialOutcome {
        selected_chs: selected,
        mr_position,
        stop_index,
        ch_power,
        ch_gain,
        mr_power,
        mr_gain,
        direct_gains,
        min_gain_selected,
        outage,
    })
}

/// Powers with unit shadowing and fading and the robot parked at its start.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub ch_direct: BTreeMap<usize, f64>,
    pub ch_relay: BTreeMap<usize, f64>,
    pub mr: f64,
}

impl Baseline {
    /// Reference power for a node: direct-to-FC for CHs.
    pub fn power(&self, node: Node) -> Option<f64> {
        match node {
            Node::Ch(id) => self.ch_direct.get(&id).copied(),
            Node::Mr => Some(self.mr),
        }
    }
}

pub fn non_fading_baseline(topo: &Topology, p_ref: f64, alpha: f64) -> Baseline {
    let power = |a: &Position, b: &Position| p_ref * a.distance(b).powf(alpha);
    Baseline {
        ch_direct: topo.ch_ids().zip(&topo.chs).map(|(id, q)| (id, power(q, &topo.fc))).collect(),
        ch_relay: topo.ch_ids().zip(&topo.chs).map(|(id, q)| (id, power(q, &topo.mr_start))).collect(),
        mr: power(&topo.mr_start, &topo.fc),
    }
}
