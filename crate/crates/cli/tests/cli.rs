//! End-to-end checks of the `catron` binary: determinism of the file
//! outputs, config handling, and the fast slice of the validation command.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_catron"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("catron-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn wigner_outputs_are_byte_identical_across_runs() {
    let dir = tmp_dir("det");
    for sub in ["a", "b"] {
        let out = dir.join(sub);
        let status = bin()
            .args(["--out", out.to_str().unwrap(), "--grid", "-6:6:41", "--cutoff", "30"])
            .args(["wigner", "--source", "exact"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(dir.join("a/wigner_exact.csv")).unwrap();
    let b = std::fs::read(dir.join("b/wigner_exact.csv")).unwrap();
    assert_eq!(a, b);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_echo_reproduces_outputs() {
    let dir = tmp_dir("echo");
    let first = dir.join("first");
    let status = bin()
        .args(["--out", first.to_str().unwrap(), "--grid", "-5:5:31", "--cutoff", "24"])
        .args(["rate", "--points", "20"])
        .status()
        .unwrap();
    assert!(status.success());
    // rerun from the echoed config alone
    let second = dir.join("second");
    let status = bin()
        .args(["--config", first.join("config_echo.txt").to_str().unwrap()])
        .args(["--out", second.to_str().unwrap()])
        .args(["rate", "--points", "20"])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        std::fs::read(first.join("rate_sweep.csv")).unwrap(),
        std::fs::read(second.join("rate_sweep.csv")).unwrap()
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn rate_table_has_exact_zero_detuning_endpoints() {
    let dir = tmp_dir("rate");
    let status = bin()
        .args(["--out", dir.to_str().unwrap()])
        .args(["rate", "--points", "10"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&dir.join("rate_sweep.csv"));
    for (g, want) in [(5.0, -10.0), (6.0, -12.0), (7.0, -14.0)] {
        let row = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .find(|l| l.starts_with(&format!("{g},0,")))
            .unwrap_or_else(|| panic!("missing Delta=0 row for G={g}"));
        let ln_rate: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((ln_rate - want).abs() < 1e-12, "G={g}: {ln_rate}");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn instanton_summary_matches_closed_form() {
    let dir = tmp_dir("inst");
    let status = bin()
        .args(["--out", dir.to_str().unwrap()])
        .args(["instanton"])
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&read(&dir.join("instanton_summary.json"))).unwrap();
    let action = summary["action_re"].as_f64().unwrap();
    let closed = summary["ln_rate_closed_form"].as_f64().unwrap();
    assert!((action - closed).abs() <= 1e-3 * closed.abs());
    assert!(summary["max_abs_L"].as_f64().unwrap() <= 1e-8);
    // trajectory file has the expected header and endpoints
    let traj = read(&dir.join("instanton.csv"));
    let mut lines = traj.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "t,re_alpha,im_alpha,re_chi,im_chi,abs_L");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn validate_fast_slice_passes_and_writes_report() {
    let dir = tmp_dir("validate");
    let output = bin()
        .args(["--out", dir.to_str().unwrap(), "--grid", "-6:6:81", "--cutoff", "40"])
        .args(["validate", "--only", "IV,A5,A8"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "validate failed:\n{stdout}");
    assert!(stdout.contains("PASS A5"));
    assert!(stdout.contains("PASS A8"));
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.join("validate_report.json"))).unwrap();
    assert!(report["all_passed"].as_bool().unwrap());
    assert!(report["criteria"].as_array().unwrap().len() >= 7);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn invalid_config_fails_before_compute() {
    let dir = tmp_dir("badcfg");
    let cfg = dir.join("bad.txt");
    std::fs::write(&cfg, "eta = 0\n").unwrap();
    let output = bin()
        .args(["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()])
        .args(["wigner"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("eta"), "unexpected error text: {stderr}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn grid_flag_is_validated() {
    let dir = tmp_dir("badgrid");
    let output = bin()
        .args(["--out", dir.to_str().unwrap(), "--grid", "0:0:9"])
        .args(["wigner"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let _ = std::fs::remove_dir_all(&dir);
}
