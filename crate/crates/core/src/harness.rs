//! Monte-Carlo sweeps over the number of stopping points `K` and the number
//! of relayed cluster heads `L`.
//!
//! Each trial draws its randomness from a stream keyed by
//! `(seed, K, L, trial index)`, so results do not depend on how trials are
//! spread over worker threads.

use crate::error::{Error, Result};
use crate::network::{non_fading_baseline, run_block, Baseline, ChannelConfig, Node, Topology, TrialOutcome};
use crate::planner::{Objective, PlannerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Fraction of the (sorted) sample kept by the trimmed-mean estimator.
pub const TRIM_KEEP: f64 = 0.999;
/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;
/// Minimum trials per (K, L) cell for trend assertions to be meaningful.
pub const MIN_TREND_TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub channel: ChannelConfig,
    /// Short step in meters; `None` means a tenth of the wavelength.
    pub ell_d: Option<f64>,
    /// Long step in meters; when given it must match the first J0 zero.
    pub ell_u: Option<f64>,
    pub phi: f64,
    pub objective: Objective,
    pub k_sweep: Vec<usize>,
    pub l_sweep: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Number of sensor nodes; documentation only.
    pub m_sensors: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: Topology::default(),
            channel: ChannelConfig::default(),
            ell_d: None,
            ell_u: None,
            phi: 0.0,
            objective: Objective::G2,
            k_sweep: vec![1, 2, 4, 8, 16],
            l_sweep: vec![1, 2, 3],
            trials: 10_000,
            seed: 1,
            m_sensors: 90,
        }
    }
}

impl ExperimentConfig {
    pub fn planner(&self, k_points: usize, l_links: usize) -> PlannerConfig {
        let mut cfg = PlannerConfig::new(k_points, l_links, self.channel.wavelength, self.channel.alpha);
        if let Some(ell_d) = self.ell_d {
            cfg.ell_d = ell_d;
        }
        if let Some(ell_u) = self.ell_u {
            cfg.ell_u = ell_u;
        }
        cfg.phi = self.phi;
        cfg.objective = self.objective;
        cfg
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = self.channel.violations();
        out.extend(self.topology.violations(self.channel.wavelength));
        if self.trials < 1 {
            out.push("trials >= 1 violated".to_string());
        }
        if self.k_sweep.is_empty() {
            out.push("k_sweep must not be empty".to_string());
        }
        if self.l_sweep.is_empty() {
            out.push("l_sweep must not be empty".to_string());
        }
        let n = self.topology.n_chs();
        let ks = if self.k_sweep.is_empty() { vec![1] } else { self.k_sweep.clone() };
        let ls = if self.l_sweep.is_empty() { vec![1] } else { self.l_sweep.clone() };
        for &k in &ks {
            for &l in &ls {
                for v in self.planner(k, l).violations(n) {
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some(v) => Err(Error::Config(v.clone())),
        }
    }
}

/// Stream seed for one trial.
pub fn trial_seed(seed: u64, k_points: usize, l_links: usize, trial: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    [k_points as u64, l_links as u64, trial as u64]
        .into_iter()
        .fold(mix(seed), |acc, v| mix(acc ^ mix(v)))
}

/// Mean, 99.9%-trimmed mean and a normal-approximation 95% CI on the latter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub trimmed_mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl SampleStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, trimmed_mean: f64::NAN, ci_lo: f64::NAN, ci_hi: f64::NAN };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let keep = ((n as f64 * TRIM_KEEP).ceil() as usize).clamp(1, n);
        let kept = &sorted[..keep];
        let trimmed_mean = kept.iter().sum::<f64>() / keep as f64;
        let half = if keep > 1 {
            let var = kept.iter().map(|v| (v - trimmed_mean).powi(2)).sum::<f64>() / (keep - 1) as f64;
            Z_95 * (var / keep as f64).sqrt()
        } else {
            0.0
        };
        Self { n, mean, trimmed_mean, ci_lo: trimmed_mean - half, ci_hi: trimmed_mean + half }
    }

    pub fn overlaps(&self, other: &SampleStats) -> bool {
        self.ci_lo <= other.ci_hi && other.ci_lo <= self.ci_hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub k: usize,
    pub l: usize,
    pub trials: usize,
    pub outages: usize,
    /// Power of each node, over the link it uses in each trial.
    pub nodes: BTreeMap<Node, SampleStats>,
    /// Power of relayed CHs, pooled over the selected CHs of every trial.
    pub selected_ch: SampleStats,
    /// Smallest true link gain at the chosen stopping point.
    pub min_gain: SampleStats,
    pub selection_counts: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub k_sweep: Vec<usize>,
    pub l_sweep: Vec<usize>,
    pub trials: usize,
    /// K-major, L-minor, in sweep order.
    pub cells: Vec<CellReport>,
    /// Per L: per CH, fraction of trials in which the FC selected it.
    pub selection: BTreeMap<usize, BTreeMap<usize, f64>>,
    pub mean_direct_gain: BTreeMap<usize, f64>,
    pub baseline: Baseline,
    pub outage_count: usize,
}

impl MetricsReport {
    pub fn cell(&self, k: usize, l: usize) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.k == k && c.l == l)
    }

    /// CH with the smallest mean direct CH-to-FC gain.
    pub fn worst_ch(&self) -> Option<usize> {
        self.mean_direct_gain
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(id, _)| *id)
    }
}

fn summarize_cell(k: usize, l: usize, n_chs: usize, outcomes: &[TrialOutcome]) -> CellReport {
    let mut per_node: BTreeMap<Node, Vec<f64>> = BTreeMap::new();
    let mut selected = Vec::new();
    let mut min_gain = Vec::new();
    let mut selection_counts: BTreeMap<usize, usize> = (1..=n_chs).map(|id| (id, 0)).collect();
    let mut outages = 0;
    for o in outcomes {
        for id in &o.selected_chs {
            *selection_counts.entry(*id).or_default() += 1;
        }
        if o.outage {
            outages += 1;
            continue;
        }
        for (&id, &p) in &o.ch_power {
            per_node.entry(Node::Ch(id)).or_default().push(p);
        }
        per_node.entry(Node::Mr).or_default().push(o.mr_power);
        selected.extend(o.selected_chs.iter().map(|id| o.ch_power[id]));
        min_gain.push(o.min_gain_selected);
    }
    CellReport {
        k,
        l,
        trials: outcomes.len(),
        outages,
        nodes: per_node.iter().map(|(n, v)| (*n, SampleStats::from_samples(v))).collect(),
        selected_ch: SampleStats::from_samples(&selected),
        min_gain: SampleStats::from_samples(&min_gain),
        selection_counts,
    }
}

/// Runs every trial of one (K, L) cell, in trial order.
pub fn run_cell(cfg: &ExperimentConfig, k: usize, l: usize) -> Result<Vec<TrialOutcome>> {
    let planner = cfg.planner(k, l);
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, k, l, t));
            run_block(&cfg.topology, &planner, &cfg.channel, &mut rng)
        })
        .collect()
}

/// Runs the full sweep on `threads` workers (0 = all available cores).
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<MetricsReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| collect_report(cfg))
}

fn collect_report(cfg: &ExperimentConfig) -> Result<MetricsReport> {
    let n = cfg.topology.n_chs();
    let mut cells = Vec::new();
    let mut direct_sum: BTreeMap<usize, f64> = BTreeMap::new();
    let mut direct_n = 0usize;
    for &k in &cfg.k_sweep {
        for &l in &cfg.l_sweep {
            let outcomes = run_cell(cfg, k, l)?;
            for o in &outcomes {
                for (id, g) in &o.direct_gains {
                    *direct_sum.entry(*id).or_default() += g;
                }
            }
            direct_n += outcomes.len();
            cells.push(summarize_cell(k, l, n, &outcomes));
        }
    }

    let mut selection = BTreeMap::new();
    for &l in &cfg.l_sweep {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        let mut total = 0;
        for c in cells.iter().filter(|c| c.l == l) {
            total += c.trials;
            for (id, n) in &c.selection_counts {
                *counts.entry(*id).or_default() += n;
            }
        }
        selection.insert(l, counts.into_iter().map(|(id, n)| (id, n as f64 / total as f64)).collect());
    }

    Ok(MetricsReport {
        k_sweep: cfg.k_sweep.clone(),
        l_sweep: cfg.l_sweep.clone(),
        trials: cfg.trials,
        outage_count: cells.iter().map(|c| c.outages).sum(),
        cells,
        selection,
        mean_direct_gain: direct_sum.into_iter().map(|(id, s)| (id, s / direct_n as f64)).collect(),
        baseline: non_fading_baseline(&cfg.topology, cfg.channel.p_ref, cfg.channel.alpha),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendCheck {
    pub name: &'static str,
    pub passed: bool,
    pub vacuous: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendSummary {
    pub checks: Vec<TrendCheck>,
    /// Per L: drop of the selected-CH trimmed-mean power from the first to
    /// the last K of the sweep, in dB.
    pub power_drop_db: BTreeMap<usize, f64>,
    /// Per L: smallest K from which the worst CH's CI upper bound stays
    /// below its non-fading direct baseline.
    pub crossover_k: BTreeMap<usize, Option<usize>>,
}

impl TrendSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Evaluates the qualitative trends:
/// (a) relayed-CH power non-increasing in K,
/// (b) MR power non-decreasing in L,
/// (c) the CH with the weakest direct link is the most often relayed.
///
/// Adjacent sweep points whose confidence intervals overlap are accepted.
pub fn summarize_trend(report: &MetricsReport) -> Result<TrendSummary> {
    let ks = sorted(&report.k_sweep);
    let ls = sorted(&report.l_sweep);
    if ks.len() < 2 {
        return Err(Error::domain("trend (a) needs at least two K values in the sweep"));
    }
    let cell = |k: usize, l: usize| {
        report.cell(k, l).ok_or_else(|| Error::domain(format!("report has no cell K={k}, L={l}")))
    };

    let mut violations = Vec::new();
    let mut power_drop_db = BTreeMap::new();
    for &l in &ls {
        for w in ks.windows(2) {
            let (a, b) = (cell(w[0], l)?.selected_ch, cell(w[1], l)?.selected_ch);
            if !(b.trimmed_mean <= a.trimmed_mean || a.overlaps(&b)) {
                violations.push(format!("L={l}: K={} -> K={} rises", w[0], w[1]));
            }
        }
        let first = cell(ks[0], l)?.selected_ch.trimmed_mean;
        let last = cell(ks[ks.len() - 1], l)?.selected_ch.trimmed_mean;
        power_drop_db.insert(l, 10.0 * (first / last).log10());
    }
    let mut checks = vec![TrendCheck {
        name: "(a) selected-CH power non-increasing in K",
        passed: violations.is_empty(),
        vacuous: false,
        detail: if violations.is_empty() { "ok".into() } else { violations.join("; ") },
    }];

    let mut violations = Vec::new();
    for &k in &ks {
        for w in ls.windows(2) {
            let (a, b) = (cell(k, w[0])?.nodes[&Node::Mr], cell(k, w[1])?.nodes[&Node::Mr]);
            if !(b.trimmed_mean >= a.trimmed_mean || a.overlaps(&b)) {
                violations.push(format!("K={k}: L={} -> L={} falls", w[0], w[1]));
            }
        }
    }
    checks.push(TrendCheck {
        name: "(b) MR power non-decreasing in L",
        passed: violations.is_empty(),
        vacuous: ls.len() < 2,
        detail: if ls.len() < 2 {
            "single L value".into()
        } else if violations.is_empty() {
            "ok".into()
        } else {
            violations.join("; ")
        },
    });

    let n = report.mean_direct_gain.len();
    let worst = report.worst_ch();
    let mut violations = Vec::new();
    let mut informative = 0;
    for &l in &ls {
        if l >= n {
            continue;
        }
        informative += 1;
        let probs = &report.selection[&l];
        let w = worst.expect("non-empty direct gains");
        let pw = probs[&w];
        if probs.iter().any(|(id, p)| *id != w && *p >= pw) {
            violations.push(format!("L={l}: CH{w} is not the most selected"));
        }
    }
    checks.push(TrendCheck {
        name: "(c) weakest-direct-link CH has the highest selection probability",
        passed: violations.is_empty(),
        vacuous: informative == 0,
        detail: if informative == 0 {
            "every CH is always selected".into()
        } else if violations.is_empty() {
            format!("worst CH = CH{}", worst.unwrap_or(0))
        } else {
            violations.join("; ")
        },
    });

    let mut crossover_k = BTreeMap::new();
    if let Some(w) = worst {
        let base = report.baseline.ch_direct[&w];
        for &l in &ls {
            let mut k_star = None;
            for &k in ks.iter().rev() {
                if cell(k, l)?.nodes[&Node::Ch(w)].ci_hi < base {
                    k_star = Some(k);
                } else {
                    break;
                }
            }
            crossover_k.insert(l, k_star);
        }
    }

    Ok(TrendSummary { checks, power_drop_db, crossover_k })
}
