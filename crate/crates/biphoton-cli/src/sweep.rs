//! Sweep jobs: a validated grid over one physical axis, a set of estimators
//! to evaluate on every grid point, and a deterministic parallel runner.
//!
//! Rows are evaluated independently and collected in grid order, so the
//! output is identical for any thread count. A failing estimator writes its
//! reason into the row's error field and leaves the cell empty; the sweep
//! itself never aborts on a row.

use std::time::Instant;

use rayon::prelude::*;

use biphoton_core::jsa::{BiphotonState, ModulationKind, ModulationSpec, PumpWidth, SpdcParams};
use biphoton_core::schmidt::{
    approx_k_closed, mehler_params, mehler_params_modulated, schmidt_heuristic, schmidt_numeric,
    sigma_p_from_k, truncation_dim, DEFAULT_TRUNCATION_TOL, MAX_TRUNCATION,
};
use biphoton_core::symmetry::{
    ds_closed_modulated, ds_closed_spdc, ds_parity_series, ds_quadrature_with_order,
    DEFAULT_ORACLE_ORDER,
};
use biphoton_core::units;

use crate::config::{Config, PumpRatio};

/// Hard ceiling on grid points per job.
pub const MAX_GRID_COUNT: usize = 1_000_000;

/// Default tolerance handed to the parity-series estimator.
pub const DEFAULT_SERIES_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Modulation time scale β; grid in attoseconds.
    Beta,
    /// Target Schmidt number of the unmodulated state; the pump width is
    /// solved from each grid value. Dimensionless, strictly above 1.
    K,
    /// Pump width as a ratio of σ₁; dimensionless, positive.
    SigmaP,
    /// Relative delay τ₂ − τ₁, split symmetrically; grid in femtoseconds.
    DeltaTau,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::K => "k",
            SweepAxis::SigmaP => "sigma_p",
            SweepAxis::DeltaTau => "delta_tau",
        }
    }

    /// Column label for the raw grid value in its boundary unit.
    pub fn value_label(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta_as",
            SweepAxis::K => "k_target",
            SweepAxis::SigmaP => "sigma_p_ratio",
            SweepAxis::DeltaTau => "delta_tau_fs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl Spacing {
    pub fn name(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Closed-form symmetry degree; dispatches on the modulation kind.
    Closed,
    /// Gauss-Hermite quadrature of the swap overlap.
    Quadrature,
    /// Hermite parity-series route to the symmetry degree.
    ParitySeries,
    /// Schmidt number from the dense reduced-density-matrix eigensolve.
    NumericDiag,
    /// Schmidt number from the diagonal Laguerre-ladder estimate.
    Heuristic,
    /// Closed-form Schmidt-number surrogate.
    ApproxKClosed,
}

impl Estimator {
    pub const NAMES: [&'static str; 6] = [
        "closed",
        "quadrature",
        "parity_series",
        "numeric_diag",
        "heuristic",
        "approx_k_closed",
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "closed" | "closed_spdc" | "closed_modulated" => Some(Estimator::Closed),
            "quadrature" => Some(Estimator::Quadrature),
            "parity_series" => Some(Estimator::ParitySeries),
            "numeric_diag" => Some(Estimator::NumericDiag),
            "heuristic" => Some(Estimator::Heuristic),
            "approx_k_closed" => Some(Estimator::ApproxKClosed),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Closed => "closed",
            Estimator::Quadrature => "quadrature",
            Estimator::ParitySeries => "parity_series",
            Estimator::NumericDiag => "numeric_diag",
            Estimator::Heuristic => "heuristic",
            Estimator::ApproxKClosed => "approx_k_closed",
        }
    }

    /// Output column the estimator fills.
    pub fn column(self) -> &'static str {
        match self {
            Estimator::Closed => "ds_closed",
            Estimator::Quadrature => "ds_quadrature",
            Estimator::ParitySeries => "ds_parity",
            Estimator::NumericDiag => "k_numeric",
            Estimator::Heuristic => "k_heuristic",
            Estimator::ApproxKClosed => "k_approx",
        }
    }

    pub fn is_schmidt(self) -> bool {
        matches!(
            self,
            Estimator::NumericDiag | Estimator::Heuristic | Estimator::ApproxKClosed
        )
    }

    /// True for estimators that diagonalize a truncated kernel and therefore
    /// report a basis size alongside the Schmidt number.
    pub fn reports_truncation(self) -> bool {
        matches!(self, Estimator::NumericDiag | Estimator::Heuristic)
    }

    fn supports_kind(self, kind: ModulationKind) -> bool {
        match self {
            Estimator::Closed => matches!(kind, ModulationKind::None | ModulationKind::Cosine),
            Estimator::Quadrature | Estimator::ParitySeries => true,
            Estimator::NumericDiag | Estimator::Heuristic | Estimator::ApproxKClosed => {
                kind == ModulationKind::Cosine
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    /// Grid point `i` in boundary units; the endpoints are reproduced
    /// exactly so that reruns and downstream joins can match on them.
    pub fn value(&self, i: usize) -> f64 {
        if i == 0 {
            return self.min;
        }
        if i + 1 == self.count {
            return self.max;
        }
        let t = i as f64 / (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => self.min * (1.0 - t) + self.max * t,
            Spacing::Log => (self.min.ln() * (1.0 - t) + self.max.ln() * t).exp(),
        }
    }
}

#[derive(Debug)]
pub enum JobError {
    CountOutOfRange { count: usize },
    GridNotFinite { min: f64, max: f64 },
    MinNotBelowMax { min: f64, max: f64 },
    LogNeedsPositiveMin { min: f64 },
    EmptyEstimators,
    EstimatorKindMismatch { estimator: &'static str, kind: &'static str },
    EstimatorNeedsFinitePump { estimator: &'static str },
    AxisNeedsModulation { axis: &'static str },
    AxisDomain { axis: &'static str, reason: &'static str },
    PumpRequired,
    ModulationScaleRequired,
    BetaWithoutModulation,
}

impl std::fmt::Display for JobError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JobError::CountOutOfRange { count } => {
                write!(f, "grid count {count} out of range [2, {MAX_GRID_COUNT}]")
            }
            JobError::GridNotFinite { min, max } => {
                write!(f, "grid bounds must be finite, got [{min}, {max}]")
            }
            JobError::MinNotBelowMax { min, max } => {
                write!(f, "grid needs min < max, got [{min}, {max}]")
            }
            JobError::LogNeedsPositiveMin { min } => {
                write!(f, "log spacing needs min > 0, got {min}")
            }
            JobError::EmptyEstimators => write!(f, "estimator set is empty"),
            JobError::EstimatorKindMismatch { estimator, kind } => {
                write!(f, "estimator {estimator} does not apply to {kind} modulation")
            }
            JobError::EstimatorNeedsFinitePump { estimator } => {
                write!(f, "estimator {estimator} needs a finite pump width")
            }
            JobError::AxisNeedsModulation { axis } => {
                write!(f, "the {axis} axis needs modulation_kind cosine or sine")
            }
            JobError::AxisDomain { axis, reason } => write!(f, "{axis} axis: {reason}"),
            JobError::PumpRequired => write!(f, "sigma_p_ratio is required for this axis"),
            JobError::ModulationScaleRequired => {
                write!(f, "beta_as or delta_l_nm is required when modulation is on")
            }
            JobError::BetaWithoutModulation => {
                write!(f, "beta_as/delta_l_nm given but modulation_kind is none")
            }
        }
    }
}

impl std::error::Error for JobError {}

/// A fully realized sweep: base state in internal units (rad/s, seconds),
/// the grid in boundary units, and the estimator set.
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub sigma1: f64,
    pub sigma2: f64,
    /// `None` exactly when the axis supplies the pump width per row.
    pub sigma_p: Option<PumpWidth>,
    pub omega: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub kind: ModulationKind,
    /// Fixed modulation scale in seconds; `None` when the axis supplies it
    /// or the kind is `none`.
    pub beta: Option<f64>,
    pub axis: SweepAxis,
    pub grid: GridSpec,
    pub estimators: Vec<Estimator>,
}

impl SweepJob {
    pub fn from_config(cfg: &Config) -> Result<SweepJob, JobError> {
        let sweep = cfg.sweep.as_ref().ok_or(JobError::EmptyEstimators)?;
        let base = &cfg.base;
        let sigma1 = units::angular_from_thz(base.sigma1_thz);
        let job = SweepJob {
            sigma1,
            sigma2: units::angular_from_thz(base.sigma2_thz),
            sigma_p: match (sweep.axis, base.sigma_p_ratio) {
                (SweepAxis::K | SweepAxis::SigmaP, _) => None,
                (_, Some(PumpRatio::Finite(r))) => Some(PumpWidth::Finite(r * sigma1)),
                (_, Some(PumpRatio::Infinite)) => Some(PumpWidth::Infinite),
                (_, None) => return Err(JobError::PumpRequired),
            },
            omega: units::angular_from_thz(base.omega_thz),
            tau1: units::seconds_from_fs(base.tau1_fs),
            tau2: units::seconds_from_fs(base.tau2_fs),
            kind: base.modulation_kind,
            beta: base.beta_as.map(units::seconds_from_as),
            axis: sweep.axis,
            grid: GridSpec {
                min: sweep.min,
                max: sweep.max,
                count: sweep.count,
                spacing: sweep.spacing,
            },
            estimators: sweep.estimators.clone(),
        };
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<(), JobError> {
        let g = &self.grid;
        if g.count < 2 || g.count > MAX_GRID_COUNT {
            return Err(JobError::CountOutOfRange { count: g.count });
        }
        if !g.min.is_finite() || !g.max.is_finite() {
            return Err(JobError::GridNotFinite { min: g.min, max: g.max });
        }
        if !(g.min < g.max) {
            return Err(JobError::MinNotBelowMax { min: g.min, max: g.max });
        }
        if g.spacing == Spacing::Log && g.min <= 0.0 {
            return Err(JobError::LogNeedsPositiveMin { min: g.min });
        }

        match self.axis {
            SweepAxis::Beta => {
                if self.kind == ModulationKind::None {
                    return Err(JobError::AxisNeedsModulation { axis: "beta" });
                }
                if g.min < 0.0 {
                    return Err(JobError::AxisDomain {
                        axis: "beta",
                        reason: "grid must be non-negative",
                    });
                }
            }
            SweepAxis::K => {
                if g.min <= 1.0 {
                    return Err(JobError::AxisDomain {
                        axis: "k",
                        reason: "grid must stay strictly above 1",
                    });
                }
            }
            SweepAxis::SigmaP => {
                if g.min <= 0.0 {
                    return Err(JobError::AxisDomain {
                        axis: "sigma_p",
                        reason: "grid must be strictly positive",
                    });
                }
            }
            SweepAxis::DeltaTau => {}
        }

        if self.estimators.is_empty() {
            return Err(JobError::EmptyEstimators);
        }
        let kind_name = match self.kind {
            ModulationKind::None => "none",
            ModulationKind::Cosine => "cosine",
            ModulationKind::Sine => "sine",
        };
        for est in &self.estimators {
            if !est.supports_kind(self.kind) {
                return Err(JobError::EstimatorKindMismatch {
                    estimator: est.name(),
                    kind: kind_name,
                });
            }
            if est.is_schmidt() && self.sigma_p == Some(PumpWidth::Infinite) {
                return Err(JobError::EstimatorNeedsFinitePump { estimator: est.name() });
            }
        }

        if self.kind == ModulationKind::None && self.beta.is_some() {
            return Err(JobError::BetaWithoutModulation);
        }
        if self.kind != ModulationKind::None && self.axis != SweepAxis::Beta && self.beta.is_none()
        {
            return Err(JobError::ModulationScaleRequired);
        }
        Ok(())
    }

    /// Deduplicated estimator set in input order.
    pub fn unique_estimators(&self) -> Vec<Estimator> {
        let mut out = Vec::with_capacity(self.estimators.len());
        for &e in &self.estimators {
            if !out.contains(&e) {
                out.push(e);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Gauss-Hermite order for the quadrature estimator.
    pub quad_order: usize,
    /// Truncation tolerance for the parity-series estimator.
    pub series_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { quad_order: DEFAULT_ORACLE_ORDER, series_tol: DEFAULT_SERIES_TOL }
    }
}

/// One evaluated grid point. Cells the job did not request — or whose
/// estimator failed — stay `None`; failures leave their reason in `errors`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis_value: f64,
    pub ds_closed: Option<f64>,
    pub ds_quadrature: Option<f64>,
    pub ds_parity: Option<f64>,
    pub p2c: Option<f64>,
    pub k_numeric: Option<f64>,
    pub k_heuristic: Option<f64>,
    pub k_approx: Option<f64>,
    pub trunc_dim: Option<usize>,
    pub errors: Vec<String>,
    /// Wall-clock seconds spent on this row; reported on stderr, never
    /// serialized, so identical jobs produce identical files.
    pub wall_s: f64,
}

impl SweepRow {
    fn empty(axis_value: f64) -> Self {
        SweepRow {
            axis_value,
            ds_closed: None,
            ds_quadrature: None,
            ds_parity: None,
            p2c: None,
            k_numeric: None,
            k_heuristic: None,
            k_approx: None,
            trunc_dim: None,
            errors: Vec::new(),
            wall_s: 0.0,
        }
    }

    fn set(&mut self, column: &'static str, value: f64) {
        if !value.is_finite() {
            self.errors.push(format!("{column}: non-finite result {value}"));
            return;
        }
        let cell = match column {
            "ds_closed" => &mut self.ds_closed,
            "ds_quadrature" => &mut self.ds_quadrature,
            "ds_parity" => &mut self.ds_parity,
            "k_numeric" => &mut self.k_numeric,
            "k_heuristic" => &mut self.k_heuristic,
            "k_approx" => &mut self.k_approx,
            _ => unreachable!("unknown column"),
        };
        *cell = Some(value);
    }

    fn fail(&mut self, column: &'static str, err: impl std::fmt::Display) {
        self.errors.push(format!("{column}: {err}"));
    }
}

#[derive(Debug)]
pub struct SweepResult {
    pub job: SweepJob,
    pub options: RunOptions,
    pub rows: Vec<SweepRow>,
    pub total_wall_s: f64,
}

/// Evaluate every grid point, in parallel, collecting rows in grid order.
pub fn run_sweep(job: &SweepJob, options: RunOptions) -> Result<SweepResult, JobError> {
    job.validate()?;
    let start = Instant::now();
    let rows: Vec<SweepRow> = (0..job.grid.count)
        .into_par_iter()
        .map(|i| eval_row(job, job.grid.value(i), options))
        .collect();
    Ok(SweepResult { job: job.clone(), options, rows, total_wall_s: start.elapsed().as_secs_f64() })
}

/// Realize the biphoton state at one grid value.
fn realize(job: &SweepJob, value: f64) -> Result<BiphotonState, String> {
    let mut sigma_p = job.sigma_p;
    let mut tau1 = job.tau1;
    let mut tau2 = job.tau2;
    let mut beta = job.beta;
    match job.axis {
        SweepAxis::Beta => beta = Some(units::seconds_from_as(value)),
        SweepAxis::K => {
            sigma_p =
                Some(sigma_p_from_k(value, job.sigma1, job.sigma2).map_err(|e| e.to_string())?);
        }
        SweepAxis::SigmaP => sigma_p = Some(PumpWidth::Finite(value * job.sigma1)),
        SweepAxis::DeltaTau => {
            let dt = units::seconds_from_fs(value);
            tau1 = -0.5 * dt;
            tau2 = 0.5 * dt;
        }
    }
    let sigma_p = sigma_p.ok_or_else(|| "pump width unresolved".to_string())?;
    let spdc = SpdcParams::new(job.sigma1, job.sigma2, sigma_p, job.omega, tau1, tau2)
        .map_err(|e| e.to_string())?;
    let modulation = match job.kind {
        ModulationKind::None => ModulationSpec::none(),
        ModulationKind::Cosine => {
            ModulationSpec::cosine(beta.ok_or("modulation scale unresolved")?)
                .map_err(|e| e.to_string())?
        }
        ModulationKind::Sine => ModulationSpec::sine(beta.ok_or("modulation scale unresolved")?)
            .map_err(|e| e.to_string())?,
    };
    BiphotonState::new(spdc, modulation).map_err(|e| e.to_string())
}

fn eval_row(job: &SweepJob, value: f64, options: RunOptions) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow::empty(value);
    let state = match realize(job, value) {
        Ok(s) => s,
        Err(e) => {
            row.errors.push(format!("state: {e}"));
            row.wall_s = start.elapsed().as_secs_f64();
            return row;
        }
    };

    for est in job.unique_estimators() {
        match est {
            Estimator::Closed => match job.kind {
                ModulationKind::None => row.set("ds_closed", ds_closed_spdc(state.spdc()).d_s),
                _ => match ds_closed_modulated(&state) {
                    Ok(r) => row.set("ds_closed", r.d_s),
                    Err(e) => row.fail("ds_closed", e),
                },
            },
            Estimator::Quadrature => match ds_quadrature_with_order(&state, options.quad_order) {
                Ok(r) => row.set("ds_quadrature", r.d_s),
                Err(e) => row.fail("ds_quadrature", e),
            },
            Estimator::ParitySeries => match ds_parity_series(&state, options.series_tol) {
                Ok(r) => row.set("ds_parity", r.d_s),
                Err(e) => row.fail("ds_parity", e),
            },
            Estimator::NumericDiag => match mehler_params_modulated(&state) {
                Ok(params) => {
                    let dim = truncation_dim(params.z, DEFAULT_TRUNCATION_TOL);
                    if dim < MAX_TRUNCATION {
                        match schmidt_numeric(&state) {
                            Ok(spec) => {
                                row.set("k_numeric", spec.k);
                                row.trunc_dim = Some(spec.truncation);
                            }
                            Err(e) => row.fail("k_numeric", e),
                        }
                    } else {
                        row.fail(
                            "k_numeric",
                            format!(
                                "basis would exceed the {MAX_TRUNCATION}-mode eigensolve cap"
                            ),
                        );
                    }
                }
                Err(e) => row.fail("k_numeric", e),
            },
            Estimator::Heuristic => match mehler_params_modulated(&state) {
                Ok(params) => {
                    let dim = truncation_dim(params.z, DEFAULT_TRUNCATION_TOL);
                    match schmidt_heuristic(&state, dim) {
                        Ok(spec) => {
                            row.set("k_heuristic", spec.k);
                            row.trunc_dim.get_or_insert(spec.truncation);
                        }
                        Err(e) => row.fail("k_heuristic", e),
                    }
                }
                Err(e) => row.fail("k_heuristic", e),
            },
            Estimator::ApproxKClosed => match approx_k_closed(&state) {
                Ok(k) => row.set("k_approx", k),
                Err(e) => row.fail("k_approx", e),
            },
        }
    }

    let ds = row.ds_closed.or(row.ds_quadrature).or(row.ds_parity);
    if let Some(d) = ds {
        row.p2c = Some(0.5 * (1.0 - d));
    }
    row.wall_s = start.elapsed().as_secs_f64();
    row
}

/// Baseline (β = 0) Schmidt number of the job's unmodulated state, when the
/// pump is fixed and finite — reported in headers next to the truncation
/// metadata so sweep files carry their own normalization.
pub fn baseline_k(job: &SweepJob) -> Option<f64> {
    match job.sigma_p {
        Some(PumpWidth::Finite(sp)) => {
            let spdc = SpdcParams::new(
                job.sigma1,
                job.sigma2,
                PumpWidth::Finite(sp),
                job.omega,
                job.tau1,
                job.tau2,
            )
            .ok()?;
            Some(mehler_params(&spdc).k_standard())
        }
        _ => None,
    }
}
