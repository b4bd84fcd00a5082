//! Sweep serialization: CSV with `#` metadata lines, or line-delimited JSON.
//!
//! Output is a pure function of the job, the run options, and the library
//! version — wall-clock timing is never written, numeric cells use 17
//! significant digits, and the row order is the grid order — so identical
//! jobs produce byte-identical files regardless of thread count.

use std::io::{self, Write};

use biphoton_core::jsa::{ModulationKind, PumpWidth};
use biphoton_core::schmidt::{DEFAULT_TRUNCATION_TOL, MAX_TRUNCATION};
use biphoton_core::units;

use crate::sweep::{baseline_k, Estimator, SweepAxis, SweepJob, SweepResult, SweepRow};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

fn fmt_cell(v: f64) -> String {
    format!("{v:.16e}")
}

/// RFC-4180 quoting: a field containing a comma, quote, or line break is
/// wrapped in double quotes with inner quotes doubled.
fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        let mut out = String::with_capacity(field.len() + 2);
        out.push('"');
        for ch in field.chars() {
            if ch == '"' {
                out.push('"');
            }
            out.push(ch);
        }
        out.push('"');
        out
    } else {
        field.to_string()
    }
}

fn requested(job: &SweepJob, est: Estimator) -> bool {
    job.estimators.contains(&est)
}

fn has_truncation_column(job: &SweepJob) -> bool {
    job.estimators.iter().any(|e| e.reports_truncation())
}

/// Column names, in serialization order, for one job.
pub fn column_names(job: &SweepJob) -> Vec<&'static str> {
    let mut cols: Vec<&'static str> = match job.axis {
        SweepAxis::Beta => vec!["beta_s", "beta_over_beta0", "delta_l_nm"],
        SweepAxis::K => vec!["k_target"],
        SweepAxis::SigmaP => vec!["sigma_p_ratio"],
        SweepAxis::DeltaTau => vec!["delta_tau_fs"],
    };
    if requested(job, Estimator::Closed) {
        cols.push("ds_closed");
    }
    if requested(job, Estimator::Quadrature) {
        cols.push("ds_quadrature");
    }
    if requested(job, Estimator::ParitySeries) {
        cols.push("ds_parity");
    }
    cols.push("p2c");
    if requested(job, Estimator::NumericDiag) {
        cols.push("k_numeric");
    }
    if requested(job, Estimator::Heuristic) {
        cols.push("k_heuristic");
    }
    if requested(job, Estimator::ApproxKClosed) {
        cols.push("k_approx");
    }
    if has_truncation_column(job) {
        cols.push("trunc_dim");
    }
    cols.push("error");
    cols
}

enum Cell {
    Num(Option<f64>),
    Int(Option<usize>),
    Text(String),
}

fn cell_for(job: &SweepJob, row: &SweepRow, name: &str) -> Cell {
    match name {
        "beta_s" => Cell::Num(Some(units::seconds_from_as(row.axis_value))),
        "beta_over_beta0" => {
            let beta = units::seconds_from_as(row.axis_value);
            Cell::Num(Some(beta / units::resonance_beta(0, job.omega)))
        }
        "delta_l_nm" => {
            let beta = units::seconds_from_as(row.axis_value);
            Cell::Num(Some(units::nm_from_meters(units::path_difference_from_beta(beta))))
        }
        "k_target" | "sigma_p_ratio" | "delta_tau_fs" => Cell::Num(Some(row.axis_value)),
        "ds_closed" => Cell::Num(row.ds_closed),
        "ds_quadrature" => Cell::Num(row.ds_quadrature),
        "ds_parity" => Cell::Num(row.ds_parity),
        "p2c" => Cell::Num(row.p2c),
        "k_numeric" => Cell::Num(row.k_numeric),
        "k_heuristic" => Cell::Num(row.k_heuristic),
        "k_approx" => Cell::Num(row.k_approx),
        "trunc_dim" => Cell::Int(row.trunc_dim),
        "error" => Cell::Text(row.errors.join("; ")),
        other => unreachable!("unknown column {other}"),
    }
}

/// Header echo as ordered key-value pairs, shared by both formats.
fn header_pairs(result: &SweepResult) -> Vec<(&'static str, String)> {
    let job = &result.job;
    let mut pairs: Vec<(&'static str, String)> = vec![
        ("tool_version", TOOL_VERSION.to_string()),
        ("core_version", biphoton_core::VERSION.to_string()),
        ("axis", job.axis.name().to_string()),
        ("axis_unit", job.axis.value_label().to_string()),
        ("spacing", job.grid.spacing.name().to_string()),
        ("count", job.grid.count.to_string()),
        ("min", format!("{}", job.grid.min)),
        ("max", format!("{}", job.grid.max)),
        ("sigma1_thz", format!("{}", units::thz_from_angular(job.sigma1))),
        ("sigma2_thz", format!("{}", units::thz_from_angular(job.sigma2))),
        (
            "sigma_p_ratio",
            match job.sigma_p {
                None => "swept".to_string(),
                Some(PumpWidth::Infinite) => "infinite".to_string(),
                Some(PumpWidth::Finite(sp)) => format!("{}", sp / job.sigma1),
            },
        ),
        ("omega_thz", format!("{}", units::thz_from_angular(job.omega))),
        ("tau1_fs", format!("{}", units::fs_from_seconds(job.tau1))),
        ("tau2_fs", format!("{}", units::fs_from_seconds(job.tau2))),
        (
            "modulation_kind",
            match job.kind {
                ModulationKind::None => "none",
                ModulationKind::Cosine => "cosine",
                ModulationKind::Sine => "sine",
            }
            .to_string(),
        ),
    ];
    if job.kind != ModulationKind::None {
        pairs.push((
            "beta_as",
            match job.beta {
                None => "swept".to_string(),
                Some(b) => format!("{}", units::as_from_seconds(b)),
            },
        ));
    }
    pairs.push((
        "estimators",
        job.estimators.iter().map(|e| e.name()).collect::<Vec<_>>().join(","),
    ));
    if requested(job, Estimator::Closed) {
        pairs.push((
            "ds_closed_form",
            match job.kind {
                ModulationKind::None => "closed_spdc",
                _ => "closed_modulated",
            }
            .to_string(),
        ));
    }
    pairs.push(("quad_order", result.options.quad_order.to_string()));
    pairs.push(("series_tol", format!("{:e}", result.options.series_tol)));
    pairs.push(("truncation_tol", format!("{DEFAULT_TRUNCATION_TOL:e}")));
    pairs.push(("truncation_cap", MAX_TRUNCATION.to_string()));
    if let Some(k0) = baseline_k(job) {
        pairs.push(("baseline_k", format!("{k0}")));
    }
    pairs
}

pub fn write_csv<W: Write>(w: &mut W, result: &SweepResult) -> io::Result<()> {
    for (key, value) in header_pairs(result) {
        writeln!(w, "# {key}: {value}")?;
    }
    let cols = column_names(&result.job);
    writeln!(w, "{}", cols.join(","))?;
    for row in &result.rows {
        let mut cells = Vec::with_capacity(cols.len());
        for name in &cols {
            let cell = cell_for(&result.job, row, name);
            cells.push(match cell {
                Cell::Num(Some(v)) => fmt_cell(v),
                Cell::Num(None) => String::new(),
                Cell::Int(Some(d)) => d.to_string(),
                Cell::Int(None) => String::new(),
                Cell::Text(s) => csv_quote(&s),
            });
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_jsonl<W: Write>(w: &mut W, result: &SweepResult) -> io::Result<()> {
    let mut header = serde_json::Map::new();
    header.insert("type".to_string(), "header".into());
    for (key, value) in header_pairs(result) {
        header.insert(key.to_string(), value.into());
    }
    writeln!(w, "{}", serde_json::Value::Object(header))?;

    let cols = column_names(&result.job);
    for row in &result.rows {
        let mut obj = serde_json::Map::new();
        obj.insert("type".to_string(), "row".into());
        for name in &cols {
            let value = match cell_for(&result.job, row, name) {
                Cell::Num(Some(v)) => serde_json::Value::from(v),
                Cell::Num(None) => serde_json::Value::Null,
                Cell::Int(Some(d)) => serde_json::Value::from(d),
                Cell::Int(None) => serde_json::Value::Null,
                Cell::Text(s) => {
                    if s.is_empty() {
                        serde_json::Value::Null
                    } else {
                        serde_json::Value::from(s)
                    }
                }
            };
            obj.insert(name.to_string(), value);
        }
        writeln!(w, "{}", serde_json::Value::Object(obj))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_str;
    use crate::sweep::{run_sweep, RunOptions};

    fn small_result() -> SweepResult {
        let cfg = parse_str(
            "sigma1_thz = 10\nsigma2_thz = 10\nsigma_p_ratio = 1\nomega_thz = 844.5\n\
             modulation_kind = cosine\naxis = beta\nmin = 0\nmax = 600\ncount = 3\n\
             estimators = closed, approx_k_closed\n",
        )
        .unwrap();
        let job = SweepJob::from_config(&cfg).unwrap();
        run_sweep(&job, RunOptions::default()).unwrap()
    }

    #[test]
    fn csv_layout_matches_request() {
        let result = small_result();
        let mut buf = Vec::new();
        write_csv(&mut buf, &result).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header_line = text
            .lines()
            .find(|l| !l.starts_with('#'))
            .unwrap();
        assert_eq!(
            header_line,
            "beta_s,beta_over_beta0,delta_l_nm,ds_closed,p2c,k_approx,error"
        );
        assert!(text.contains("# quad_order: 200"));
        assert!(text.contains("# truncation_cap: 4000"));
        assert!(text.contains("# ds_closed_form: closed_modulated"));
        assert!(text.contains("# baseline_k: 1.15470053837925"));
        let data_rows: Vec<&str> =
            text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(data_rows.len(), 3);
        // 17 significant digits in scientific notation.
        assert!(data_rows[1].contains("e-16,"), "beta_s cell: {}", data_rows[1]);
    }

    #[test]
    fn csv_is_byte_stable() {
        let a = {
            let mut buf = Vec::new();
            write_csv(&mut buf, &small_result()).unwrap();
            buf
        };
        let b = {
            let mut buf = Vec::new();
            write_csv(&mut buf, &small_result()).unwrap();
            buf
        };
        assert_eq!(a, b);
    }

    #[test]
    fn jsonl_lines_parse_and_echo_job() {
        let result = small_result();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &result).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        let header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(header["type"], "header");
        assert_eq!(header["axis"], "beta");
        assert_eq!(header["estimators"], "closed,approx_k_closed");
        let row: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(row["type"], "row");
        assert!(row["ds_closed"].is_f64());
        assert!(row["error"].is_null());
        assert!(row.get("ds_quadrature").is_none());
    }

    #[test]
    fn quoting_shields_commas_and_quotes() {
        assert_eq!(csv_quote("plain"), "plain");
        assert_eq!(csv_quote("a,b"), "\"a,b\"");
        assert_eq!(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
