//! Batch front end: `run` writes the sweep results, `validate` checks a
//! config file.
//!
//! Output files of `run`:
//!
//! - `powers.csv`: `K,L,node,mean_w,ci_lo_w,ci_hi_w,trimmed_mean_w,baseline_w`
//! - `selection.csv`: `L,ch_id,selection_probability`
//! - `manifest.json`: `config_hash, version, seed, started_at, finished_at, outage_count`
//! - `summary.txt`: trend checks in plain text

use crate::config::load_experiment;
use crate::error::Error;
use crate::harness::{run_experiment, summarize_trend, MetricsReport, TrendSummary, MIN_TREND_TRIALS};
use crate::network::Node;
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TRENDS: i32 = 3;

pub const THREADS_ENV: &str = "MDA_SIM_THREADS";

pub const POWERS_HEADER: &str = "K,L,node,mean_w,ci_lo_w,ci_hi_w,trimmed_mean_w,baseline_w";
pub const SELECTION_HEADER: &str = "L,ch_id,selection_probability";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub outage_count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub overrides: Vec<String>,
    pub assert_trends: bool,
    pub seed: Option<u64>,
    /// Worker threads; 0 = all available cores.
    pub threads: usize,
}

/// Worker count from `MDA_SIM_THREADS`, 0 (all cores) when unset or invalid.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn powers_csv(report: &MetricsReport) -> String {
    let mut out = String::from(POWERS_HEADER);
    out.push('\n');
    for cell in &report.cells {
        for (node, stats) in &cell.nodes {
            let baseline = report.baseline.power(*node).unwrap_or(f64::NAN);
            let _ = writeln!(
                out,
                "{},{},{},{:e},{:e},{:e},{:e},{:e}",
                cell.k, cell.l, node, stats.mean, stats.ci_lo, stats.ci_hi, stats.trimmed_mean, baseline
            );
        }
    }
    out
}

pub fn selection_csv(report: &MetricsReport) -> String {
    let mut out = String::from(SELECTION_HEADER);
    out.push('\n');
    for (l, probs) in &report.selection {
        for (id, p) in probs {
            let _ = writeln!(out, "{l},{id},{p:e}");
        }
    }
    out
}

pub fn summary_text(report: &MetricsReport, trends: Option<&TrendSummary>, note: Option<&str>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trials per (K, L): {}", report.trials);
    let _ = writeln!(out, "outages: {}", report.outage_count);
    let _ = writeln!(out, "\nselected-CH trimmed-mean power [W]:");
    for cell in &report.cells {
        let s = cell.selected_ch;
        let _ = writeln!(
            out,
            "  K={:<3} L={}  {:.6e}  (95% CI {:.6e} .. {:.6e})  MR {:.6e}",
            cell.k, cell.l, s.trimmed_mean, s.ci_lo, s.ci_hi, cell.nodes[&Node::Mr].trimmed_mean
        );
    }
    let _ = writeln!(out, "\nselection probability:");
    for (l, probs) in &report.selection {
        let row: Vec<String> = probs.iter().map(|(id, p)| format!("CH{id}={p:.4}")).collect();
        let _ = writeln!(out, "  L={l}  {}", row.join("  "));
    }
    let _ = writeln!(out, "\nnon-fading baseline [W]:");
    for (id, p) in &report.baseline.ch_direct {
        let _ = writeln!(out, "  CH{id} direct {p:.6e}  via MR start {:.6e}", report.baseline.ch_relay[id]);
    }
    let _ = writeln!(out, "  MR {:.6e}", report.baseline.mr);
    if let Some(t) = trends {
        let _ = writeln!(out, "\ntrends:");
        for c in &t.checks {
            let verdict = match (c.passed, c.vacuous) {
                (true, true) => "PASS (vacuous)",
                (true, false) => "PASS",
                (false, _) => "FAIL",
            };
            let _ = writeln!(out, "  {verdict:<14} {}: {}", c.name, c.detail);
        }
        for (l, db) in &t.power_drop_db {
            let _ = writeln!(out, "  L={l}: selected-CH power drop first->last K = {db:.2} dB");
        }
        for (l, k) in &t.crossover_k {
            let k = k.map_or("none".to_string(), |k| k.to_string());
            let _ = writeln!(out, "  L={l}: worst-CH baseline crossover K* = {k}");
        }
    }
    if let Some(n) = note {
        let _ = writeln!(out, "\n{n}");
    }
    out
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn write_outputs(dir: &Path, files: &[(&str, String)]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Runs the configured sweep and writes the four output files.
pub fn cmd_run(opts: &RunOptions) -> i32 {
    let started_at = now();
    let bytes = match fs::read(&opts.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", opts.config.display());
            return EXIT_CONFIG;
        }
    };
    let text = match String::from_utf8(bytes.clone()) {
        Ok(t) => t,
        Err(_) => {
            eprintln!("error: {} is not UTF-8", opts.config.display());
            return EXIT_CONFIG;
        }
    };
    let mut cfg = match load_experiment(&text, &opts.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let violations = cfg.violations();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("invalid config: {v}");
        }
        return EXIT_CONFIG;
    }

    let report = match run_experiment(&cfg, opts.threads) {
        Ok(r) => r,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("error: simulation failed: {e}");
            return EXIT_CONFIG;
        }
    };

    let (trends, note) = match summarize_trend(&report) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(format!("trend checks skipped: {e}"))),
    };
    let mut note = note;
    if opts.assert_trends && cfg.trials < MIN_TREND_TRIALS {
        note = Some(format!(
            "trend assertions need at least {MIN_TREND_TRIALS} trials per cell (got {})",
            cfg.trials
        ));
    }

    let manifest = RunManifest {
        config_hash: config_hash(&bytes),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        started_at,
        finished_at: now(),
        outage_count: report.outage_count,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    let files = [
        ("powers.csv", powers_csv(&report)),
        ("selection.csv", selection_csv(&report)),
        ("manifest.json", manifest_json + "\n"),
        ("summary.txt", summary_text(&report, trends.as_ref(), note.as_deref())),
    ];
    if let Err(e) = write_outputs(&opts.out, &files) {
        eprintln!("error: cannot write to {}: {e}", opts.out.display());
        return EXIT_CONFIG;
    }
    print!("{}", files[3].1);

    if opts.assert_trends {
        let ok = cfg.trials >= MIN_TREND_TRIALS && trends.as_ref().is_some_and(TrendSummary::all_passed);
        if !ok {
            return EXIT_TRENDS;
        }
    }
    EXIT_OK
}

/// Prints every invariant violation of a config file; 0 iff valid.
pub fn cmd_validate(config: &Path) -> i32 {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return EXIT_CONFIG;
        }
    };
    let cfg = match load_experiment(&text, &[]) {
        Ok(c) => c,
        Err(e) => {
            println!("violation: {e}");
            return EXIT_INVALID;
        }
    };
    let violations = cfg.violations();
    for v in &violations {
        println!("violation: {v}");
    }
    if violations.is_empty() {
        println!("ok: {}", config.display());
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}
