mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::UNIT_CONFIG;
use spacemimo::capacity::stationary_constant;
use spacemimo::report::read_csv;

fn spacemimo(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spacemimo"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn config_with(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap()
}

#[test]
fn siso_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(dir.path(), UNIT_CONFIG);
    let out = spacemimo(&["siso"], &cfg, &dir.path().join("o"));
    assert!(out.status.success());
    let csv = read_csv(&dir.path().join("o/siso.csv")).unwrap();
    assert_eq!(csv.schema, "siso/1");
    assert_eq!(csv.rows.len(), 1);
    let gg = csv.float(0, "gamma_g").unwrap();
    assert!((csv.float(0, "xi").unwrap() - (1.0 + gg).log2()).abs() < 1e-12);
}

#[test]
fn design_picks_ten_streams_at_hundred_t_star() {
    // g = 10·10/(0.01·4e8)² and γ = P·1e14, so γg = 625·P
    let power = 100.0 * stationary_constant() / 625.0;
    let text = UNIT_CONFIG.replace("power_w = 1\n", &format!("power_w = {power:?}\n"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(dir.path(), &text);
    let out = spacemimo(&["design"], &cfg, &dir.path().join("o"));
    assert!(out.status.success());
    let csv = read_csv(&dir.path().join("o/design.csv")).unwrap();
    assert_eq!(csv.float(0, "M_opt").unwrap(), 10.0);
    assert!((csv.float(0, "x_opt").unwrap() - 10.0).abs() < 1e-9);
    // |S| = √10·λd
    assert!((csv.float(0, "area_m2").unwrap() / (10f64.sqrt() * 4e6) - 1.0).abs() < 1e-12);
}

#[test]
fn bounds_within_degrees_of_freedom_have_no_violations() {
    let text = UNIT_CONFIG
        .replace("scan_m = 1, 4\n", "scan_m = 1, 2, 4, 8\n")
        .replace("scan_s_over_ld = 1, 10\n", "scan_s_over_ld = 3, 10, 30\n")
        .replace("scan_gamma_g = 1, 100\n", "scan_gamma_g = 1, 100, 10000\n");
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(dir.path(), &text);
    let out = spacemimo(&["bounds", "--trials", "100"], &cfg, &dir.path().join("o"));
    assert!(out.status.success());
    let csv = read_csv(&dir.path().join("o/bounds.csv")).unwrap();
    assert_eq!(csv.rows.len(), 36);
    for r in 0..csv.rows.len() {
        assert_eq!(csv.float(r, "ub_violations").unwrap(), 0.0);
        // M = 1 meets the bound with equality up to rounding
        assert!(csv.float(r, "mean_xi").unwrap() <= csv.float(r, "ub14").unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn flags_override_config_and_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(dir.path(), UNIT_CONFIG);
    assert!(spacemimo(&["ergodic"], &cfg, &dir.path().join("a")).status.success());
    assert!(spacemimo(&["ergodic", "--seed", "43"], &cfg, &dir.path().join("b")).status.success());
    assert!(spacemimo(&["ergodic", "--trials", "50"], &cfg, &dir.path().join("c")).status.success());
    let a = read_csv(&dir.path().join("a/ergodic.csv")).unwrap();
    let b = read_csv(&dir.path().join("b/ergodic.csv")).unwrap();
    let c = read_csv(&dir.path().join("c/ergodic.csv")).unwrap();
    assert_eq!(a.float(0, "trials").unwrap(), 200.0);
    assert_eq!(c.float(0, "trials").unwrap(), 50.0);
    assert_ne!(a.float(0, "mean_xi"), b.float(0, "mean_xi"));
}

#[test]
fn config_errors_name_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = UNIT_CONFIG.replace("streams = 4", "streams = four");
    let cfg = config_with(dir.path(), &text);
    let out = spacemimo(&["siso"], &cfg, &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    let rec = stderr_json(&out);
    assert_eq!(rec["error"], "config");
    assert_eq!(rec["key"], "streams");
    assert_eq!(rec["line"], 10);

    let cfg = config_with(dir.path(), &format!("{UNIT_CONFIG}colour = blue\n"));
    let out = spacemimo(&["siso"], &cfg, &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["key"], "colour");
}

#[test]
fn invariant_errors_exit_three() {
    // far-field regime requires g < 1
    let text = UNIT_CONFIG.replace("range_m = 4e8", "range_m = 10");
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(dir.path(), &text);
    let out = spacemimo(&["siso"], &cfg, &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "invariant");

    // apertures cannot fit 4 cells of a 3λd region
    let text = UNIT_CONFIG
        .replace("cell_counts = 64, 256", "cell_counts = 4")
        .replace("tx_aperture_m2 = 10", "tx_aperture_m2 = 1e7");
    let cfg = config_with(dir.path(), &text);
    let out = spacemimo(&["achievability"], &cfg, &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn numerical_errors_exit_four() {
    // a 1-panel rule cannot resolve f(c) at c = 2000
    let text = UNIT_CONFIG
        .replace("area_over_lambda_d = 3", "area_over_lambda_d = 1000")
        .replace("trials = 200", "trials = 100\nf_panels = 1");
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(dir.path(), &text);
    let out = spacemimo(&["moments"], &cfg, &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(4));
    let rec = stderr_json(&out);
    assert_eq!(rec["error"], "numerical");
    assert_eq!(rec["operation"], "f_of_c");
}

#[test]
fn missing_config_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = spacemimo(&["siso"], &dir.path().join("absent.cfg"), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "io");
}

#[test]
fn every_subcommand_writes_versioned_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(dir.path(), UNIT_CONFIG);
    for sub in ["mimo-sample", "prolate", "achievability", "moments", "scan"] {
        let out_dir = dir.path().join(sub);
        let out = spacemimo(&[sub], &cfg, &out_dir);
        assert!(out.status.success(), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
        for entry in std::fs::read_dir(&out_dir).unwrap() {
            let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
            let first = text.lines().next().unwrap();
            assert!(first.starts_with("# schema=") && first.ends_with("/1"), "{sub}: {first}");
            assert!(!text.contains('\r'));
        }
    }
    let conv = read_csv(&dir.path().join("achievability/achievability.csv")).unwrap();
    assert_eq!(conv.columns, ["N", "xi_discrete", "xi_limit", "gap", "gram_defect"]);
    assert!(conv.comments.iter().any(|c| c.starts_with("nyquist_reference_N=")));
    let mom = read_csv(&dir.path().join("moments/moments.csv")).unwrap();
    assert_eq!(
        mom.columns,
        ["c", "M", "f_est", "f_se", "f_bound", "m4_closed", "m4_emp", "m4_se", "bound_closed", "bound_tight"]
    );
}
