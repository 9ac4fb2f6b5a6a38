use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irs-ofdm"))
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.cfg")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn validate_prints_resolved_defaults() {
    let out = run(&["validate", "--config", default_config().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["N=64", "N_CP=16", "Γ=8.8 dB", "Q-free (SDR excluded)", "i_sa = 10"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}

#[test]
fn unknown_scheme_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.cfg",
        "sweep_axis = snr\nsweep_values = 5\nschemes = iterative, warp_drive\n",
    );
    let out = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_drive"));
}

#[test]
fn unknown_and_invalid_keys_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.cfg", "snr_dbb = 5\n");
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("snr_dbb"));

    let cfg = write_config(dir.path(), "cp.cfg", "n_cp = 3\n");
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_cp"));

    let cfg = write_config(dir.path(), "nosweep.cfg", "n = 64\n");
    let out = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_a_plain_failure() {
    let out = run(&["validate", "--config", "/nonexistent/x.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/x.cfg"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "small.cfg",
        "sweep_axis = snr\nsweep_values = 0, 10\nn_realizations = 4\ncsi_mode = estimated\n",
    );
    let cfg = cfg.to_str().unwrap();
    let mut outputs = Vec::new();
    for (name, jobs) in [("a.csv", "1"), ("b.csv", "1"), ("c.csv", "3")] {
        let path = dir.path().join(name);
        let out = run(&["run", "--config", cfg, "--out", path.to_str().unwrap(), "--jobs", jobs]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4 * 5);

    let reseeded = dir.path().join("d.csv");
    let out = run(&[
        "run",
        "--config",
        cfg,
        "--out",
        reseeded.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(out.status.success());
    assert_ne!(std::fs::read(reseeded).unwrap(), outputs[0]);
}

#[test]
fn trace_writes_iterations() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/convergence.cfg");
    let out = run(&["trace", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("scenario_id,realization_index,seed,sweep_value,init,iteration,rate_bps_hz"));
    assert!(text.contains(",random,0,"));
    assert!(text.contains(",sa10,0,"));
}
