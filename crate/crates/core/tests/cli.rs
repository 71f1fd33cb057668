//! End-to-end tests of the `freqshape` binary: exit codes, stdout
//! contracts, and the CSV outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freqshape"))
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("freqshape-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn synth_prints_gain_triple() {
    let dir = scratch_dir("synth");
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 1\ntau = 1\nb = 1\nb_hat = 1\n\n\
         [run]\nmode = synth\nrho = 0.5\n",
    );
    let out = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("k_d = 0"), "stdout: {text}");
    assert!(text.contains("k_p = 3"), "stdout: {text}");
    assert!(text.contains("k_i = 2"), "stdout: {text}");
}

#[test]
fn certify_reports_condition_one_for_overestimates() {
    let dir = scratch_dir("certify");
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 1\nb_hat = 2\n\n\
         [run]\nmode = certify\nrho = 0.5\n",
    );
    let out = bin()
        .args(["certify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("verdict = StableByConditionI"));
    let csv = fs::read_to_string(dir.join("certificates.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("rho,"));
    assert!(csv.contains("StableByConditionI"));
}

#[test]
fn certify_sweeps_a_rho_grid_into_csv_rows() {
    let dir = scratch_dir("certify-grid");
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 1\n\n\
         [run]\nmode = certify\nrho_grid = lin:0.1:0.9:5\n",
    );
    let out = bin()
        .args(["certify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("certificates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7); // version + header + 5 rows
                                        // Small rho with a matched estimate is outside the nonnegative-kd set
                                        // but still certified by the overestimate condition.
    let first_row = csv.lines().nth(2).unwrap();
    assert!(first_row.starts_with("0.1,"));
    assert!(first_row.contains("StableByConditionI"));
    assert!(first_row.contains(",false,"), "row: {first_row}");
}

#[test]
fn pareto_runs_are_deterministic() {
    let dir = scratch_dir("pareto");
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 1\n\n\
         [run]\nmode = pareto\nrho_grid = 0.2,0.4,0.6,0.8\nnadir_bound_mhz = 4000\n",
    );
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = bin()
            .args(["pareto", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out_dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        assert!(stdout_of(&out).contains("min_peak: rho ="));
    }
    let a = fs::read(out_a.join("pareto.csv")).unwrap();
    let b = fs::read(out_b.join("pareto.csv")).unwrap();
    assert_eq!(a, b, "pareto.csv must be byte-identical across runs");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().nth(1), Some("rho,nadir_mhz,peak_pu"));
    assert_eq!(text.lines().count(), 6); // version line + header + 4 rows
}

#[test]
fn mismatch_sweep_marks_unstable_cells() {
    let dir = scratch_dir("mismatch");
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 0.05\n\n\
         [run]\nmode = mismatch\nrho = 0.05\nc_grid = 0.3,1.0\nb_grid = 0.05\n",
    );
    let out = bin()
        .args(["mismatch", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .env("FREQSHAPE_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("mismatch.csv")).unwrap();
    let unstable_row = csv
        .lines()
        .find(|l| l.starts_with("0.05,0.3,"))
        .expect("underestimate row present");
    assert!(unstable_row.ends_with(",,UNSTABLE"), "row: {unstable_row}");
    let stable_row = csv.lines().find(|l| l.starts_with("0.05,1,")).unwrap();
    assert!(stable_row.ends_with(",stable"), "row: {stable_row}");
}

#[test]
fn sensitivity_mode_writes_both_routes() {
    let dir = scratch_dir("sensitivity");
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 1\n\n\
         [run]\nmode = sensitivity\nrho_grid = 0.2,0.5,0.8\n",
    );
    let out = bin()
        .args(["sensitivity", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("sensitivity.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((fields[1] - fields[2]).abs() <= 1e-6 * fields[1]);
    }
}

#[test]
fn simulate_writes_trajectory_and_metrics() {
    let dir = scratch_dir("simulate");
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 1\n\n\
         [run]\nmode = simulate\nrho = 0.5\nstep_pu = 1.0\n",
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("nadir_mhz = "));
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("t_s,freq_mhz,power_pu"));
    assert!(csv.lines().count() > 100);
    // First sample: zero state.
    let first = csv.lines().nth(2).unwrap();
    assert!(first.starts_with("0,"));
}

#[test]
fn unstable_simulation_exits_with_computation_code() {
    let dir = scratch_dir("unstable");
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 0.05\nb_hat = 0.015\n\n\
         [run]\nmode = simulate\nrho = 0.05\n",
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn validation_failures_exit_with_one() {
    let dir = scratch_dir("validation");
    // Unreadable config path.
    let out = bin()
        .args(["synth", "--config", "/nonexistent/path.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Invalid parameter value.
    let cfg = write_config(
        &dir,
        "[params]\nh = -4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 1\n\n\
         [run]\nmode = synth\nrho = 0.5\n",
    );
    let out = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // rho out of range is caught before any computation.
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 1\n\n\
         [run]\nmode = synth\nrho = 1.5\n",
    );
    let out = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Unknown mode.
    let out = bin()
        .args(["frobnicate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Horizon shorter than the time step.
    let cfg = write_config(
        &dir,
        "[params]\nh = 4\nalpha_l = 1\nalpha_g = 20\ntau = 1\nb = 1\n\n\
         [run]\nmode = simulate\nrho = 0.5\ndt = 5.0\nhorizon = 1.0\n",
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn quote_figure_emits_builtin_tables() {
    let out = bin().args(["--quote-figure", "pareto"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().next(), Some("rho,nadir_mhz,peak_pu"));
    assert!(text.contains("no_ibr,424.177710580167,0"));
    assert!(text.contains("0.8,389.18896868097,0.135018331344184"));

    let out = bin().args(["--quote-figure", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pareto_on_calibrated_params_reproduces_marked_points() {
    let dir = scratch_dir("pareto-calibrated");
    let cfg = write_config(
        &dir,
        "[params]\ncalibrate = builtin:pareto\n\n\
         [run]\nmode = pareto\nrho_grid = 0.4,0.6,0.8\n",
    );
    let out = bin()
        .args(["pareto", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("pareto.csv")).unwrap();
    let reference = [
        (0.4, 300.758677900104, 0.418307175705351),
        (0.6, 348.972412047316, 0.27558446625031),
        (0.8, 389.18896868097, 0.135018331344184),
    ];
    for (line, (rho, nadir_ref, peak_ref)) in csv.lines().skip(2).zip(reference) {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields[0], rho);
        assert!(
            (fields[1] - nadir_ref).abs() <= 0.01 * nadir_ref,
            "rho {rho}: nadir {} vs {nadir_ref}",
            fields[1]
        );
        assert!(
            (fields[2] - peak_ref).abs() <= (0.02 * peak_ref).max(0.005),
            "rho {rho}: peak {} vs {peak_ref}",
            fields[2]
        );
    }
}

#[test]
fn calibrate_directive_resolves_builtin_anchors() {
    let dir = scratch_dir("calibrate");
    let cfg = write_config(
        &dir,
        "[params]\ncalibrate = builtin:pareto\n\n[run]\nmode = synth\nrho = 0.5\n",
    );
    let out = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    assert!(text.contains("calibrated: "), "stdout: {text}");
    assert!(text.contains("k_p = "), "stdout: {text}");
    let report = fs::read_to_string(dir.join("calibration.txt")).unwrap();
    assert!(report.contains("max_rel_residual = "));
}
