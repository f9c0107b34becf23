use mda_core::cli::{cmd_run, cmd_validate, config_hash, RunOptions, EXIT_CONFIG, EXIT_INVALID, EXIT_OK, POWERS_HEADER};
use mda_core::harness::{run_experiment, summarize_trend, ExperimentConfig};
use std::path::{Path, PathBuf};
use std::process::Command;

const DEFAULT_CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.conf");

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn trends_hold_across_seeds() {
    for seed in 2..7 {
        let cfg = ExperimentConfig { seed, ..ExperimentConfig::default() };
        let report = run_experiment(&cfg, 0).unwrap();
        let trends = summarize_trend(&report).unwrap();
        assert!(trends.all_passed(), "seed {seed}: {:?}", trends.checks);
    }
}

#[test]
fn run_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let text = "experiment.trials = 1\nexperiment.k_sweep = \"1,2\"\n";
    let config = write(dir.path(), "tiny.conf", text);
    let out = dir.path().join("out");
    let code = cmd_run(&RunOptions { config, out: out.clone(), threads: 1, ..Default::default() });
    assert_eq!(code, EXIT_OK);
    for f in ["powers.csv", "selection.csv", "summary.txt", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], config_hash(text.as_bytes()));
    let powers = std::fs::read_to_string(out.join("powers.csv")).unwrap();
    let mut lines = powers.lines();
    assert_eq!(lines.next(), Some(POWERS_HEADER));
    // 2 K values x 3 L values, each with the MR and 3 CHs.
    assert_eq!(lines.count(), 2 * 3 * 4);
}

#[test]
fn unknown_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        config: DEFAULT_CONFIG.into(),
        out: dir.path().join("out"),
        overrides: vec!["planner.bogus=3".into()],
        ..Default::default()
    };
    assert_eq!(cmd_run(&opts), EXIT_CONFIG);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cmd_validate(Path::new(DEFAULT_CONFIG)), EXIT_OK);
    let equal = write(dir.path(), "eq.conf", "planner.ell_d = 0.04784248434762578\nplanner.ell_u = 0.04784248434762578\n");
    assert_eq!(cmd_validate(&equal), EXIT_INVALID);
    let too_many = write(dir.path(), "l.conf", "experiment.l_sweep = \"1,4\"\n");
    assert_eq!(cmd_validate(&too_many), EXIT_INVALID);
    assert_eq!(cmd_validate(&dir.path().join("missing.conf")), EXIT_CONFIG);
}

#[test]
fn binary_reports_unknown_override_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mda-sim"))
        .args(["run", "--config", DEFAULT_CONFIG, "--out"])
        .arg(dir.path().join("out"))
        .args(["--set", "channel.nope=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("channel.nope"));
}
