//! End-to-end tests driving the compiled `biphoton` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biphoton"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("job.conf");
    fs::write(&path, body).unwrap();
    path
}

const SMALL_SWEEP: &str = "\
sigma1_thz = 10
sigma2_thz = 10
sigma_p_ratio = 0.1
omega_thz = 844.5
modulation_kind = cosine
axis = beta
min = 0
max = 900
count = 7
estimators = closed, quadrature, approx_k_closed
";

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn sweep_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SWEEP);
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let out_c = dir.path().join("c.csv");

    for (out, threads) in [(&out_a, "1"), (&out_b, "1"), (&out_c, "4")] {
        let output = run(bin()
            .arg("sweep")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(out)
            .arg("--threads")
            .arg(threads));
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }

    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    let c = fs::read(&out_c).unwrap();
    assert_eq!(a, b, "reruns must be byte-identical");
    assert_eq!(a, c, "thread count must not change the output");
    assert!(!a.is_empty());
}

#[test]
fn sweep_stdout_csv_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SWEEP);
    let output = run(bin().arg("sweep").arg("--config").arg(&config));
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "beta_s,beta_over_beta0,delta_l_nm,ds_closed,ds_quadrature,p2c,k_approx,error"
    );
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 8);
    assert!(text.contains("# quad_order: 200"));
}

#[test]
fn jsonl_output_parses_line_by_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SWEEP);
    let output = run(bin()
        .arg("sweep")
        .arg("--config")
        .arg(&config)
        .arg("--format")
        .arg("jsonl"));
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let value: serde_json::Value =
            serde_json::from_str(line).unwrap_or_else(|e| panic!("line {}: {e}", i + 1));
        if i == 0 {
            assert_eq!(value["type"], "header");
            assert_eq!(value["modulation_kind"], "cosine");
        } else {
            assert_eq!(value["type"], "row");
            assert!(value["ds_closed"].is_f64());
            rows += 1;
        }
    }
    assert_eq!(rows, 7);
}

#[test]
fn missing_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sigma1_thz = 10\n");
    let output = run(bin().arg("sweep").arg("--config").arg(&config));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("sigma2_thz"), "{stderr}");
}

#[test]
fn invalid_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sigma1_thz = 10\nsigma2_thz = 10\nsigma_p_ratio = 0.1\nomega_thz = 844.5\n\
         modulation_kind = cosine\naxis = beta\nmin = 0\nmax = 900\ncount = 1\n\
         estimators = closed\n",
    );
    let output = run(bin().arg("sweep").arg("--config").arg(&config));
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("count"));
}

#[test]
fn estimator_kind_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sigma1_thz = 10\nsigma2_thz = 10\nsigma_p_ratio = 0.1\nomega_thz = 844.5\n\
         modulation_kind = sine\naxis = beta\nmin = 0\nmax = 900\ncount = 4\n\
         estimators = numeric_diag\n",
    );
    let output = run(bin().arg("sweep").arg("--config").arg(&config));
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("numeric_diag"));
}

#[test]
fn sine_modulation_sweeps_through_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sigma1_thz = 10\nsigma2_thz = 10\nsigma_p_ratio = 0.1\nomega_thz = 844.5\n\
         modulation_kind = sine\naxis = beta\nmin = 100\nmax = 900\ncount = 5\n\
         estimators = quadrature, parity_series\n",
    );
    let output = run(bin().arg("sweep").arg("--config").arg(&config));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = String::from_utf8(output.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(!last.ends_with(",error"), "rows present");
    // Both estimators agree on the swept sine states.
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let q: f64 = cells[3].parse().unwrap();
        let p: f64 = cells[4].parse().unwrap();
        assert!((q - p).abs() < 1e-7, "{line}");
    }
}

#[test]
fn validate_passes_on_default_oracle() {
    let output = run(bin().arg("validate").arg("--draws").arg("8"));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.matches(": PASS").count(), 4, "{stdout}");
    assert!(stdout.contains("all 4 checks passed"));
}

#[test]
fn coarse_oracle_fails_validation_with_diagnostic() {
    let output = run(bin()
        .arg("validate")
        .arg("--draws")
        .arg("8")
        .arg("--quad-order")
        .arg("10"));
    assert_eq!(output.status.code(), Some(1));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("check oracle_equivalence: FAIL"), "{stdout}");
    assert!(stdout.contains("worst draw"), "{stdout}");
}

#[test]
fn figure_bundle_writes_labeled_files() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(bin().arg("figure").arg("fig6").arg("--out-dir").arg(dir.path()));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let path = dir.path().join("fig6_ds_vs_k.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 601);
    assert!(text.contains("# axis: k"));

    // Resonant symmetry degree decreases toward -1 as K grows.
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    let first: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    let last: f64 = rows[rows.len() - 1].split(',').nth(1).unwrap().parse().unwrap();
    assert!(first > -0.2, "near K -> 1 the dip is shallow: {first}");
    assert!(last < -0.9, "deep antibunching at large K: {last}");
}

#[test]
fn resonance_report_prints_center_and_widths() {
    let output = run(bin().arg("resonance").arg("--order").arg("0"));
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    let center: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("beta_center_over_beta0: "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((center - 1.0).abs() < 1e-3, "{center}");
    assert!(stdout.contains("ds_hwhm_epsilon:"));
    assert!(stdout.contains("k_hwhm_beta_as:"));
}

#[test]
fn resonance_rejects_non_cosine_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sigma1_thz = 10\nsigma2_thz = 10\nsigma_p_ratio = 0.1\nomega_thz = 844.5\n\
         modulation_kind = sine\n",
    );
    let output = run(bin().arg("resonance").arg("--config").arg(&config));
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("cosine"));
}
