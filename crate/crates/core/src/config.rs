//! Experiment files: flat `section.key = value` lines (a TOML subset), e.g.
//!
//! ```text
//! topology.fc = "60,115"
//! topology.chs = "10,10; 60,15; 110,40"
//! experiment.k_sweep = "1,2,4,8,16"
//! channel.p_ref = 1e-6
//! ```
//!
//! Missing keys take the defaults of [`ExperimentConfig::default`].

use crate::channel::Position;
use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;
use std::collections::BTreeMap;
use toml::{Table, Value};

pub const KNOWN_KEYS: &[&str] = &[
    "topology.fc",
    "topology.chs",
    "topology.mr_start",
    "topology.roi",
    "channel.wavelength",
    "channel.alpha",
    "channel.p_ref",
    "channel.shadow_var_db",
    "channel.est_noise_var",
    "planner.ell_d",
    "planner.ell_u",
    "planner.phi",
    "planner.objective",
    "experiment.k_sweep",
    "experiment.l_sweep",
    "experiment.trials",
    "experiment.seed",
    "network.m_sensors",
];

fn flatten(prefix: &str, table: &Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Parses file text into dotted keys, rejecting keys not in [`KNOWN_KEYS`].
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, Value>> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let mut out = BTreeMap::new();
    flatten("", &table, &mut out);
    if let Some(bad) = out.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown key `{bad}`")));
    }
    Ok(out)
}

/// Applies a `KEY=VALUE` override; the value is read as a TOML literal and
/// falls back to a bare string.
pub fn apply_override(entries: &mut BTreeMap<String, Value>, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not KEY=VALUE")))?;
    let key = key.trim();
    if !KNOWN_KEYS.contains(&key) {
        return Err(Error::Config(format!("unknown override key `{key}`")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    entries.insert(key.to_string(), value);
    Ok(())
}

fn number(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("`{key}`: expected a number, got `{s}`"))),
        other => Err(Error::Config(format!("`{key}`: expected a number, got {other}"))),
    }
}

fn integer(key: &str, v: &Value) -> Result<i64> {
    match v {
        Value::Integer(i) => Ok(*i),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("`{key}`: expected an integer, got `{s}`"))),
        other => Err(Error::Config(format!("`{key}`: expected an integer, got {other}"))),
    }
}

fn count(key: &str, v: &Value) -> Result<usize> {
    usize::try_from(integer(key, v)?)
        .map_err(|_| Error::Config(format!("`{key}`: expected a non-negative integer")))
}

fn numbers(key: &str, v: &Value) -> Result<Vec<f64>> {
    match v {
        Value::Array(items) => items.iter().map(|x| number(key, x)).collect(),
        Value::String(s) => s
            .split(',')
            .map(|p| number(key, &Value::String(p.to_string())))
            .collect(),
        other => Ok(vec![number(key, other)?]),
    }
}

fn counts(key: &str, v: &Value) -> Result<Vec<usize>> {
    match v {
        Value::Array(items) => items.iter().map(|x| count(key, x)).collect(),
        Value::String(s) => s
            .split(',')
            .map(|p| count(key, &Value::String(p.to_string())))
            .collect(),
        other => Ok(vec![count(key, other)?]),
    }
}

fn position(key: &str, v: &Value) -> Result<Position> {
    match numbers(key, v)?.as_slice() {
        [x, y] => Ok(Position::new(*x, *y)),
        _ => Err(Error::Config(format!("`{key}`: expected \"x,y\""))),
    }
}

fn positions(key: &str, v: &Value) -> Result<Vec<Position>> {
    match v {
        Value::String(s) => s
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| position(key, &Value::String(p.to_string())))
            .collect(),
        Value::Array(items) => items.iter().map(|x| position(key, x)).collect(),
        other => Err(Error::Config(format!("`{key}`: expected \"x,y; x,y; ...\", got {other}"))),
    }
}

/// Builds an experiment from parsed entries on top of the defaults.
pub fn experiment_from_entries(entries: &BTreeMap<String, Value>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (key, v) in entries {
        let k = key.as_str();
        match k {
            "topology.fc" => cfg.topology.fc = position(k, v)?,
            "topology.chs" => cfg.topology.chs = positions(k, v)?,
            "topology.mr_start" => cfg.topology.mr_start = position(k, v)?,
            "topology.roi" => {
                let p = position(k, v)?;
                cfg.topology.roi = (p.x, p.y);
            }
            "channel.wavelength" => cfg.channel.wavelength = number(k, v)?,
            "channel.alpha" => cfg.channel.alpha = number(k, v)?,
            "channel.p_ref" => cfg.channel.p_ref = number(k, v)?,
            "channel.shadow_var_db" => cfg.channel.shadow_var_db = number(k, v)?,
            "channel.est_noise_var" => cfg.channel.est_noise_var = number(k, v)?,
            "planner.ell_d" => cfg.ell_d = Some(number(k, v)?),
            "planner.ell_u" => cfg.ell_u = Some(number(k, v)?),
            "planner.phi" => cfg.phi = number(k, v)?,
            "planner.objective" => {
                let s = v.as_str().ok_or_else(|| Error::Config(format!("`{k}`: expected g1 or g2")))?;
                cfg.objective = s.parse()?;
            }
            "experiment.k_sweep" => cfg.k_sweep = counts(k, v)?,
            "experiment.l_sweep" => cfg.l_sweep = counts(k, v)?,
            "experiment.trials" => cfg.trials = count(k, v)?,
            "experiment.seed" => cfg.seed = integer(k, v)? as u64,
            "network.m_sensors" => cfg.m_sensors = count(k, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
    }
    Ok(cfg)
}

/// Parses a config file's text with `--set` overrides applied in order.
pub fn load_experiment(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut entries = parse_entries(text)?;
    for o in overrides {
        apply_override(&mut entries, o)?;
    }
    experiment_from_entries(&entries)
}
