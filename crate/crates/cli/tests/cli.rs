//! End-to-end runs of the binary: artifacts, determinism, constraint
//! enforcement, and manifest completeness.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hecke-resonance"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn field_info_reports_class_number_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--d", "-5", "--out", dir.path().to_str().unwrap(), "field-info"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["h_k"], 2);
    assert_eq!(v["D"], -20);
    assert!(dir.path().join("field_info.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn verify_kernels_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--out", dir.path().to_str().unwrap(), "verify-kernels"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(read(&dir.path().join("kernel_checks.csv"))).unwrap();
    assert!(csv.lines().count() > 40);
    assert!(!csv.contains(",false"), "some kernel check failed:\n{csv}");
}

#[test]
fn search_rejects_overlong_resonator() {
    // epsilon = 0.19 and tiny X makes N = X^{0.06}; force a violation by
    // passing a huge epsilon... epsilon is capped, so instead use a config
    // whose X is too small for the fixed N derivation to matter and check
    // the moment constraint path via X < 100.
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--X", "50", "--out", dir.path().to_str().unwrap(), "search"]);
    assert!(!out.status.success());
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("X >= 100"), "{msg}");
    // failed runs leave no partial outputs
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn moment_runs_are_byte_identical() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for d in [&dir1, &dir2] {
        let out = run(&[
            "--d",
            "-1",
            "--X",
            "256",
            "--seed",
            "7",
            "--out",
            d.path().to_str().unwrap(),
            "moment",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        read(&dir1.path().join("moment.json")),
        read(&dir2.path().join("moment.json")),
        "numeric outputs must be byte-identical for identical config"
    );
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&dir1, "1"), (&dir2, "2")] {
        let out = run(&[
            "--d",
            "-1",
            "--X",
            "512",
            "--threads",
            threads,
            "--out",
            dir.path().to_str().unwrap(),
            "moment",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        read(&dir1.path().join("moment.json")),
        read(&dir2.path().join("moment.json")),
        "final numbers must be identical at any thread count"
    );
}

#[test]
fn search_produces_report_sidecar_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--d",
        "-1",
        "--X",
        "128",
        "--out",
        dir.path().to_str().unwrap(),
        "search",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&read(&dir.path().join("report.json"))).unwrap();
    assert!(report["log_abs_l_star"].is_number());
    assert!(report["moment"]["denominator_direct"].as_f64().unwrap() > 0.0);
    let csv = String::from_utf8(read(&dir.path().join("report.csv"))).unwrap();
    assert!(csv.lines().count() > 10);
    // manifest lists every output with a content hash
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&dir.path().join("manifest.json"))).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for o in outputs {
        let path = Path::new(o["path"].as_str().unwrap()).to_path_buf();
        let bytes = read(&path);
        let mut hasher = <sha2::Sha256 as sha2::Digest>::new();
        sha2::Digest::update(&mut hasher, &bytes);
        let hex: String = sha2::Digest::finalize(hasher)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        assert_eq!(o["sha256"].as_str().unwrap(), hex);
    }
}

#[test]
fn config_file_with_decimal_strings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"d": -3, "X": "512", "epsilon": "0.05", "afe": {"slack": "8"}, "out_dir": "OUT"}"#,
    )
    .unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "probe-offdiag",
        "--nu-max",
        "2",
        "--m-max",
        "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(read(&dir.path().join("o/offdiag_probe.csv"))).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 4); // header + windows
    // unknown keys rejected
    std::fs::write(&cfg, r#"{"d": -3, "unknown_key": 1}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "field-info"]);
    assert!(!out.status.success());
}

#[test]
fn compute_l_emits_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--d",
        "-1",
        "--out",
        dir.path().join("l.csv").to_str().unwrap(),
        "compute-l",
        "--ell-range",
        "4",
        "40",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(read(&dir.path().join("l.csv"))).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "ell,class_index,L_half,log_abs_L,lambda_log_abs,n_terms,est_err"
    );
    assert_eq!(lines.count(), 10); // ell = 4, 8, ..., 40
    // frozen reference: first row is ell = 4
    let first = csv.lines().nth(1).unwrap();
    let l4: f64 = first.split(',').nth(2).unwrap().parse().unwrap();
    assert!((l4 - 0.520074467694).abs() < 1e-9);
}

#[test]
fn euler_check_all_rows_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--d", "-5", "--out", dir.path().to_str().unwrap(), "euler-check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(read(&dir.path().join("euler_check.csv"))).unwrap();
    assert!(!csv.contains(",false"));
}
