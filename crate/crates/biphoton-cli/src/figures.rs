//! Canned sweep bundles reproducing the library's reference plots: each
//! bundle is a list of labeled jobs over the reference photon pair
//! (σ₁ = σ₂ = 2π·10 THz marginals at Ω = 2π·844.5 THz, zero delays).
//!
//! Grids over the modulation scale are expressed through the dimensionless
//! detuning u = 2βΩ/π, so u = 1 is the first antibunching resonance and
//! u = 2n+1 the n-th.

use biphoton_core::jsa::{ModulationKind, PumpWidth};
use biphoton_core::units;

use crate::sweep::{Estimator, GridSpec, Spacing, SweepAxis, SweepJob};

pub const REF_SIGMA_THZ: f64 = 10.0;
pub const REF_OMEGA_THZ: f64 = 844.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Coincidence probability against the Schmidt number of unmodulated
    /// pairs, one curve per marginal-width ratio r = σ₁/σ₂ ∈ {1, 2, 3, 5}.
    Fig2,
    /// Symmetry degree over three windows of the modulation scale — the
    /// first, eleventh, and forty-first resonance — at σ_p = 0.01 σ₁.
    Fig4,
    /// Symmetry degree and Schmidt number across the first two resonances,
    /// full span and a zoom on u ≈ 1, at σ_p/σ₁ ∈ {1, 0.1, 0.01}.
    Fig5,
    /// Resonant symmetry degree against the Schmidt number.
    Fig6,
    /// Dense-eigensolve, closed-surrogate, and diagonal-ladder Schmidt
    /// numbers around the first resonance at σ_p/σ₁ ∈ {0.1, 0.01}.
    Fig7,
}

impl FigureId {
    pub const NAMES: [&'static str; 5] = ["fig2", "fig4", "fig5", "fig6", "fig7"];

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "fig2" => Some(FigureId::Fig2),
            "fig4" => Some(FigureId::Fig4),
            "fig5" => Some(FigureId::Fig5),
            "fig6" => Some(FigureId::Fig6),
            "fig7" => Some(FigureId::Fig7),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }
}

fn ref_base() -> (f64, f64, f64) {
    let sigma = units::angular_from_thz(REF_SIGMA_THZ);
    let omega = units::angular_from_thz(REF_OMEGA_THZ);
    (sigma, sigma, omega)
}

/// Grid over u = 2βΩ/π in attosecond boundary units.
fn beta_window(u_lo: f64, u_hi: f64, count: usize, omega: f64) -> GridSpec {
    let beta0 = units::resonance_beta(0, omega);
    GridSpec {
        min: units::as_from_seconds(u_lo * beta0),
        max: units::as_from_seconds(u_hi * beta0),
        count,
        spacing: Spacing::Linear,
    }
}

fn pump_label(ratio: f64) -> String {
    format!("sp{}", format!("{ratio}").replace('.', "p"))
}

pub fn figure_jobs(id: FigureId) -> Vec<(String, SweepJob)> {
    let (sigma1, sigma2, omega) = ref_base();
    let beta0 = units::resonance_beta(0, omega);
    match id {
        FigureId::Fig2 => [1.0, 2.0, 3.0, 5.0]
            .iter()
            .map(|&r| {
                (
                    format!("r{r:.0}"),
                    SweepJob {
                        sigma1: r * sigma1,
                        sigma2,
                        sigma_p: None,
                        omega,
                        tau1: 0.0,
                        tau2: 0.0,
                        kind: ModulationKind::None,
                        beta: None,
                        axis: SweepAxis::K,
                        grid: GridSpec {
                            min: 1.001,
                            max: 10.0,
                            count: 500,
                            spacing: Spacing::Linear,
                        },
                        estimators: vec![Estimator::Closed],
                    },
                )
            })
            .collect(),
        FigureId::Fig4 => [(0.0, 4.0), (20.0, 24.0), (80.0, 84.0)]
            .iter()
            .map(|&(lo, hi)| {
                (
                    format!("u{:02.0}_{:02.0}", lo, hi),
                    SweepJob {
                        sigma1,
                        sigma2,
                        sigma_p: Some(PumpWidth::Finite(0.01 * sigma1)),
                        omega,
                        tau1: 0.0,
                        tau2: 0.0,
                        kind: ModulationKind::Cosine,
                        beta: None,
                        axis: SweepAxis::Beta,
                        grid: beta_window(lo, hi, 801, omega),
                        estimators: vec![Estimator::Closed],
                    },
                )
            })
            .collect(),
        FigureId::Fig5 => {
            let mut jobs = Vec::new();
            for &ratio in &[1.0, 0.1, 0.01] {
                for &(suffix, lo, hi, count) in
                    &[("full", 0.0, 4.0, 401usize), ("zoom", 0.9, 1.1, 201)]
                {
                    jobs.push((
                        format!("{}_{suffix}", pump_label(ratio)),
                        SweepJob {
                            sigma1,
                            sigma2,
                            sigma_p: Some(PumpWidth::Finite(ratio * sigma1)),
                            omega,
                            tau1: 0.0,
                            tau2: 0.0,
                            kind: ModulationKind::Cosine,
                            beta: None,
                            axis: SweepAxis::Beta,
                            grid: beta_window(lo, hi, count, omega),
                            estimators: vec![
                                Estimator::Closed,
                                Estimator::NumericDiag,
                                Estimator::ApproxKClosed,
                            ],
                        },
                    ));
                }
            }
            jobs
        }
        FigureId::Fig6 => vec![(
            "ds_vs_k".to_string(),
            SweepJob {
                sigma1,
                sigma2,
                sigma_p: None,
                omega,
                tau1: 0.0,
                tau2: 0.0,
                kind: ModulationKind::Cosine,
                beta: Some(beta0),
                axis: SweepAxis::K,
                grid: GridSpec { min: 1.001, max: 10.0, count: 600, spacing: Spacing::Linear },
                estimators: vec![Estimator::Closed],
            },
        )],
        FigureId::Fig7 => [0.1, 0.01]
            .iter()
            .map(|&ratio| {
                (
                    pump_label(ratio),
                    SweepJob {
                        sigma1,
                        sigma2,
                        sigma_p: Some(PumpWidth::Finite(ratio * sigma1)),
                        omega,
                        tau1: 0.0,
                        tau2: 0.0,
                        kind: ModulationKind::Cosine,
                        beta: None,
                        axis: SweepAxis::Beta,
                        grid: beta_window(0.8, 1.2, 201, omega),
                        estimators: vec![
                            Estimator::NumericDiag,
                            Estimator::ApproxKClosed,
                            Estimator::Heuristic,
                        ],
                    },
                )
            })
            .collect(),
    }
}
