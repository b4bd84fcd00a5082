use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use biphoton_cli::config::{self, BaseConfig, PumpRatio};
use biphoton_cli::figures::{figure_jobs, FigureId};
use biphoton_cli::output::{write_csv, write_jsonl, OutputFormat};
use biphoton_cli::sweep::{run_sweep, RunOptions, SweepJob, DEFAULT_SERIES_TOL};
use biphoton_cli::validate::{run_all, ValidateOptions, DEFAULT_DRAWS, DEFAULT_SEED};

use biphoton_core::jsa::{BiphotonState, ModulationKind, ModulationSpec, PumpWidth, SpdcParams};
use biphoton_core::resonance::{hwhm_ds, hwhm_k, locate_resonance};
use biphoton_core::symmetry::DEFAULT_ORACLE_ORDER;
use biphoton_core::units;

/// Exit 0 on success, 1 on runtime or validation-suite failure, 2 on a
/// configuration error.
#[derive(Parser)]
#[command(name = "biphoton", version, about = "Hong-Ou-Mandel biphoton sweep runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for row evaluation; 0 uses all cores. The output is
    /// identical for any value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Gauss-Hermite order for the quadrature estimator and validation
    /// oracle.
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    /// Truncation tolerance for the parity-series estimator.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Sweep {
        /// Key-value config file with base parameters and sweep keys.
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv | jsonl
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Write the labeled sweeps of a reference figure bundle.
    Figure {
        /// fig2 | fig4 | fig5 | fig6 | fig7
        id: String,
        /// Directory for the per-label output files (created if missing).
        #[arg(long)]
        out_dir: PathBuf,
        /// csv | jsonl
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Locate an antibunching resonance and measure its half-widths.
    Resonance {
        /// Base parameters; the built-in reference pair when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Resonance order n; the center is near β₀·(2n+1).
        #[arg(long, default_value_t = 0)]
        order: u32,
    },
    /// Run the self-validation suite and report each check.
    Validate {
        /// Size of the random oracle-equivalence suite.
        #[arg(long, default_value_t = DEFAULT_DRAWS)]
        draws: usize,
        /// Seed of the random suite.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(err: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_CONFIG, message: err.to_string() }
    }

    fn runtime(err: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_RUNTIME, message: err.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if !failure.message.is_empty() {
                eprintln!("error: {}", failure.message);
            }
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(Failure::runtime)?;
    }
    let options = RunOptions {
        quad_order: cli.quad_order.unwrap_or(DEFAULT_ORACLE_ORDER),
        series_tol: cli.tol.unwrap_or(DEFAULT_SERIES_TOL),
    };

    match cli.command {
        Command::Sweep { config, out, format } => {
            let format = parse_format(&format)?;
            let cfg = config::parse_file(&config).map_err(Failure::config)?;
            let job = SweepJob::from_config(&cfg).map_err(Failure::config)?;
            let result = run_sweep(&job, options).map_err(Failure::config)?;
            let row_time: f64 = result.rows.iter().map(|r| r.wall_s).sum();
            match out {
                Some(path) => {
                    let mut writer = BufWriter::new(File::create(&path).map_err(|e| {
                        Failure::runtime(format!("cannot create {}: {e}", path.display()))
                    })?);
                    emit(&mut writer, &result, format)?;
                    writer.flush().map_err(Failure::runtime)?;
                    eprintln!(
                        "wrote {} ({} rows, {:.2} s wall, {:.2} s row time)",
                        path.display(),
                        result.rows.len(),
                        result.total_wall_s,
                        row_time
                    );
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut writer = BufWriter::new(stdout.lock());
                    emit(&mut writer, &result, format)?;
                    writer.flush().map_err(Failure::runtime)?;
                }
            }
            Ok(())
        }
        Command::Figure { id, out_dir, format } => {
            let format = parse_format(&format)?;
            let fig = FigureId::from_name(&id).ok_or_else(|| {
                Failure::config(format!(
                    "unknown figure {id:?}; expected one of {}",
                    FigureId::NAMES.join(", ")
                ))
            })?;
            std::fs::create_dir_all(&out_dir).map_err(|e| {
                Failure::runtime(format!("cannot create {}: {e}", out_dir.display()))
            })?;
            for (label, job) in figure_jobs(fig) {
                let result = run_sweep(&job, options).map_err(Failure::config)?;
                let path = out_dir.join(format!("{}_{label}.{}", fig.name(), format.extension()));
                let mut writer = BufWriter::new(File::create(&path).map_err(|e| {
                    Failure::runtime(format!("cannot create {}: {e}", path.display()))
                })?);
                emit(&mut writer, &result, format)?;
                writer.flush().map_err(Failure::runtime)?;
                eprintln!(
                    "wrote {} ({} rows, {:.2} s)",
                    path.display(),
                    result.rows.len(),
                    result.total_wall_s
                );
            }
            Ok(())
        }
        Command::Resonance { config, order } => {
            let base = match config {
                Some(path) => config::parse_file(&path).map_err(Failure::config)?.base,
                None => BaseConfig::reference(),
            };
            resonance_report(&base, order)
        }
        Command::Validate { draws, seed } => {
            if draws == 0 {
                return Err(Failure::config("validate needs at least one draw"));
            }
            let reports = run_all(ValidateOptions {
                draws,
                seed,
                quad_order: options.quad_order,
                series_tol: options.series_tol,
            });
            let mut failed = 0usize;
            for report in &reports {
                let status = if report.passed { "PASS" } else { "FAIL" };
                println!("check {}: {status} - {}", report.name, report.detail);
                if !report.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                Err(Failure::runtime(format!("{failed} of {} checks failed", reports.len())))
            } else {
                println!("all {} checks passed", reports.len());
                Ok(())
            }
        }
    }
}

fn parse_format(name: &str) -> Result<OutputFormat, Failure> {
    match name {
        "csv" => Ok(OutputFormat::Csv),
        "jsonl" => Ok(OutputFormat::Jsonl),
        other => Err(Failure::config(format!("unknown format {other:?}; expected csv or jsonl"))),
    }
}

fn emit<W: Write>(
    writer: &mut W,
    result: &biphoton_cli::sweep::SweepResult,
    format: OutputFormat,
) -> Result<(), Failure> {
    match format {
        OutputFormat::Csv => write_csv(writer, result).map_err(Failure::runtime),
        OutputFormat::Jsonl => write_jsonl(writer, result).map_err(Failure::runtime),
    }
}

fn resonance_report(base: &BaseConfig, order: u32) -> Result<(), Failure> {
    if base.modulation_kind != ModulationKind::Cosine {
        return Err(Failure::config(
            "resonance reports need modulation_kind = cosine in the base config",
        ));
    }
    let sigma1 = units::angular_from_thz(base.sigma1_thz);
    let sigma_p = match base.sigma_p_ratio {
        Some(PumpRatio::Finite(r)) => PumpWidth::Finite(r * sigma1),
        Some(PumpRatio::Infinite) => PumpWidth::Infinite,
        None => return Err(Failure::config("sigma_p_ratio is required")),
    };
    let omega = units::angular_from_thz(base.omega_thz);
    let spdc = SpdcParams::new(
        sigma1,
        units::angular_from_thz(base.sigma2_thz),
        sigma_p,
        omega,
        units::seconds_from_fs(base.tau1_fs),
        units::seconds_from_fs(base.tau2_fs),
    )
    .map_err(Failure::config)?;
    let seed = units::resonance_beta(order, omega);
    let state = BiphotonState::new(spdc, ModulationSpec::cosine(seed).map_err(Failure::config)?)
        .map_err(Failure::config)?;

    let mut report = locate_resonance(&state, order).map_err(Failure::runtime)?;
    let beta0 = units::resonance_beta(0, omega);
    println!("order: {order}");
    println!("beta_center_as: {:.12e}", units::as_from_seconds(report.beta_center));
    println!("beta_center_over_beta0: {:.12}", report.beta_center / beta0);
    println!(
        "delta_l_center_nm: {:.12e}",
        units::nm_from_meters(units::path_difference_from_beta(report.beta_center))
    );
    println!("ds_at_center: {:.12}", report.ds_at_center);
    println!("p2c_at_center: {:.12}", 0.5 * (1.0 - report.ds_at_center));
    println!("k_at_center: {:.12}", report.k_at_center);

    match hwhm_ds(&state, &mut report) {
        Ok(()) => {
            if let Some(b) = report.hwhm_beta {
                println!("ds_hwhm_beta_as: {:.12e}", units::as_from_seconds(b));
            }
            if let Some(eps) = report.hwhm_epsilon {
                println!("ds_hwhm_epsilon: {:.12e}", eps);
            }
            if let Some(l) = report.hwhm_delta_l {
                println!("ds_hwhm_delta_l_nm: {:.12e}", units::nm_from_meters(l));
            }
        }
        Err(e) => println!("ds_hwhm_unavailable: {e}"),
    }
    match hwhm_k(&state, &mut report) {
        Ok(()) => {
            if let Some(b) = report.k_hwhm_beta {
                println!("k_hwhm_beta_as: {:.12e}", units::as_from_seconds(b));
            }
            if let Some(depth) = report.wing_dip_depth {
                println!("k_wing_dip_depth: {:.12e}", depth);
            }
        }
        Err(e) => println!("k_hwhm_unavailable: {e}"),
    }
    Ok(())
}
