//! Locating and characterizing antibunching resonances.
//!
//! A cosine-modulated state antibunches near β_n = π(2n + 1)/(2Ω): the
//! symmetry degree dips toward −1 and the Schmidt number peaks on the same
//! centers. This module refines those centers, measures the dip and peak
//! half-widths, and converts between the equivalent experimental axes
//! (modulator delay β, interferometer path difference ΔL = 2cβ, relative
//! detuning ε from the resonance seed).
//!
//! Width conventions differ for the two observables. Symmetry-degree dips
//! are measured where the right flank recrosses −1/2, which matches the
//! usual half-minimum reading for deep dips but rejects shallow ones
//! ([`ResonanceError::DipTooShallow`]). Schmidt-number peaks are measured
//! at half prominence, (K_baseline + K_peak)/2, since the peak rides on a
//! baseline well above zero. Each report records the measured widths next
//! to the center they belong to.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::fm;
use crate::jsa::{BiphotonState, JsaError, ModulationKind, ModulationSpec, PumpWidth, SpdcParams};
use crate::schmidt::{
    approx_k_closed, mehler_params, schmidt_numeric, sigma_p_from_k, truncation_dim, SchmidtError,
    DEFAULT_TRUNCATION_TOL, MAX_TRUNCATION,
};
use crate::symmetry::{ds_closed_modulated, SymmetryError};
use crate::units;

/// Half-width of the center-search bracket, relative to the seed β_n.
const BRACKET_MARGIN: f64 = 0.1;

/// Refinement targets are β₀ × this factor, β₀ = π/(2Ω).
const CENTER_REFINEMENT: f64 = 1e-6;

/// Wing-dip searches stop at β₀ × this factor.
const WING_REFINEMENT: f64 = 1e-5;

/// A refined center this close to a bracket edge is treated as no minimum.
const EDGE_FRACTION: f64 = 1e-3;

/// Symmetry-degree level defining the dip half-width.
const HALF_DIP_LEVEL: f64 = -0.5;

/// Peaks with less relative prominence than this have no measurable width.
const PROMINENCE_FLOOR: f64 = 1e-9;

/// 1/φ, the golden-section interior-point ratio.
const INVPHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq)]
pub enum ResonanceError {
    /// The search bracket around the seed contains no interior dip.
    NoMinimumInBracket { order: u32 },
    /// The dip bottom sits above the −1/2 crossing level.
    DipTooShallow { ds_at_center: f64 },
    /// The flank never reaches the target level inside the scan range.
    FlankNotCrossed { level: f64 },
    /// The Schmidt-number peak has no prominence over the baseline.
    PeakTooFlat { k_at_center: f64, k_baseline: f64 },
    Jsa(JsaError),
    Symmetry(SymmetryError),
    Schmidt(SchmidtError),
}

impl fmt::Display for ResonanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResonanceError::NoMinimumInBracket { order } => {
                write!(f, "no interior symmetry-degree minimum near resonance order {order}")
            }
            ResonanceError::DipTooShallow { ds_at_center } => {
                write!(f, "dip bottom {ds_at_center:e} sits above the -1/2 half-width level")
            }
            ResonanceError::FlankNotCrossed { level } => {
                write!(f, "flank never reaches level {level:e} inside the scan range")
            }
            ResonanceError::PeakTooFlat { k_at_center, k_baseline } => {
                write!(
                    f,
                    "Schmidt number {k_at_center} has no prominence over baseline {k_baseline}"
                )
            }
            ResonanceError::Jsa(e) => write!(f, "{e}"),
            ResonanceError::Symmetry(e) => write!(f, "{e}"),
            ResonanceError::Schmidt(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ResonanceError {}

impl From<JsaError> for ResonanceError {
    fn from(e: JsaError) -> Self {
        ResonanceError::Jsa(e)
    }
}

impl From<SymmetryError> for ResonanceError {
    fn from(e: SymmetryError) -> Self {
        ResonanceError::Symmetry(e)
    }
}

impl From<SchmidtError> for ResonanceError {
    fn from(e: SchmidtError) -> Self {
        ResonanceError::Schmidt(e)
    }
}

/// One refined antibunching resonance with its measured widths.
///
/// [`locate_resonance`] fills the center block; the width fields start as
/// `None` and are filled by [`hwhm_ds`] and [`hwhm_k`]. All β-like fields
/// are in seconds, `hwhm_delta_l` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceReport {
    /// Resonance order n of the seed β_n = π(2n + 1)/(2Ω).
    pub order: u32,
    /// Refined dip center.
    pub beta_center: f64,
    /// Closed-form symmetry degree at the center.
    pub ds_at_center: f64,
    /// Schmidt number at the center from the dense eigensolve
    /// (exactly 1 for an infinite pump, which stays separable).
    pub k_at_center: f64,
    /// Right-flank distance from the center to the D_S = −1/2 crossing.
    pub hwhm_beta: Option<f64>,
    /// The same half-width as a detuning, ε = 2Ω·hwhm_beta/π.
    pub hwhm_epsilon: Option<f64>,
    /// The same half-width as a path difference, exactly 2c·hwhm_beta.
    pub hwhm_delta_l: Option<f64>,
    /// Right-flank distance from the center to the Schmidt-number
    /// half-prominence crossing.
    pub k_hwhm_beta: Option<f64>,
    /// Depth of the entanglement-loss dip flanking the peak: minimum wing
    /// Schmidt number minus the unmodulated baseline (negative).
    pub wing_dip_depth: Option<f64>,
}

fn probe_state(state: &BiphotonState, beta: f64) -> Result<BiphotonState, ResonanceError> {
    Ok(BiphotonState::new(*state.spdc(), ModulationSpec::cosine(beta)?)?)
}

fn ds_on_family(state: &BiphotonState, beta: f64) -> Result<f64, ResonanceError> {
    Ok(ds_closed_modulated(&probe_state(state, beta)?)?.d_s)
}

fn k_on_family(state: &BiphotonState, beta: f64, numeric: bool) -> Result<f64, ResonanceError> {
    let probe = probe_state(state, beta)?;
    if numeric {
        Ok(schmidt_numeric(&probe)?.k)
    } else {
        Ok(approx_k_closed(&probe)?)
    }
}

/// Golden-section minimum of `f` on [a, b]; returns (argmin, min).
fn golden_min<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<(f64, f64), ResonanceError>
where
    F: FnMut(f64) -> Result<f64, ResonanceError>,
{
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > xtol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Bisection root of `f` on [lo, hi]; the caller checks the sign change.
fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64, ResonanceError>
where
    F: FnMut(f64) -> Result<f64, ResonanceError>,
{
    let lo_nonneg = f(lo)? >= 0.0;
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if (f(mid)? >= 0.0) == lo_nonneg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Refines the n-th antibunching resonance of a cosine-modulated family.
///
/// The closed-form symmetry degree is minimized by golden section inside
/// ±10% of the seed β_n = π(2n + 1)/(2Ω), to |Δβ| < β₀ × 1e−6. Since the
/// dips repeat every 2β₀, the bracket is capped at ±0.9β₀ so higher-order
/// searches cannot drift onto a neighboring dip. The source parameters of
/// `state` define the family; its own modulation delay is ignored, but it
/// must be of the cosine kind. The center block of the report is filled
/// here: the dip value from the closed form and the Schmidt number from
/// the dense eigensolve at the refined center. Width fields start empty.
///
/// Fails with [`ResonanceError::NoMinimumInBracket`] when the refined
/// point leans on a bracket edge or does not undercut both edges.
pub fn locate_resonance(
    state: &BiphotonState,
    order: u32,
) -> Result<ResonanceReport, ResonanceError> {
    if state.modulation().kind() != ModulationKind::Cosine {
        return Err(ResonanceError::Symmetry(SymmetryError::ModulationKindMismatch {
            required: "cosine",
        }));
    }
    let omega = state.spdc().omega();
    let seed = units::resonance_beta(order, omega);
    let beta0 = units::resonance_beta(0, omega);
    let span = (BRACKET_MARGIN * seed).min(0.9 * beta0);
    let (a, b) = (seed - span, seed + span);
    let xtol = beta0 * CENTER_REFINEMENT;
    let (beta_center, ds_at_center) = golden_min(|beta| ds_on_family(state, beta), a, b, xtol)?;
    let edge = EDGE_FRACTION * (b - a);
    if beta_center - a < edge || b - beta_center < edge {
        return Err(ResonanceError::NoMinimumInBracket { order });
    }
    if ds_at_center >= ds_on_family(state, a)?.min(ds_on_family(state, b)?) {
        return Err(ResonanceError::NoMinimumInBracket { order });
    }
    let k_at_center = match state.spdc().sigma_p() {
        PumpWidth::Infinite => 1.0,
        PumpWidth::Finite(_) => schmidt_numeric(&probe_state(state, beta_center)?)?.k,
    };
    Ok(ResonanceReport {
        order,
        beta_center,
        ds_at_center,
        k_at_center,
        hwhm_beta: None,
        hwhm_epsilon: None,
        hwhm_delta_l: None,
        k_hwhm_beta: None,
        wing_dip_depth: None,
    })
}

/// Measures the dip half-width where the right flank recrosses D_S = −1/2.
///
/// Fills `hwhm_beta`, `hwhm_epsilon` and `hwhm_delta_l` on the report from
/// [`locate_resonance`]. The crossing is bisected to |Δβ| < β₀ × 1e−6; the
/// detuning and path-difference equivalents are exact rescalings of the
/// same number, so the three fields agree to rounding.
///
/// A dip whose bottom does not reach −1/2 has no width under this
/// convention and fails with [`ResonanceError::DipTooShallow`]. With equal
/// marginals and σ_p = σ₁ the n = 0 bottom lands within 1e−9 *above* −1/2,
/// so that configuration is rejected here by design.
pub fn hwhm_ds(
    state: &BiphotonState,
    report: &mut ResonanceReport,
) -> Result<(), ResonanceError> {
    if !(report.ds_at_center < HALF_DIP_LEVEL) {
        return Err(ResonanceError::DipTooShallow { ds_at_center: report.ds_at_center });
    }
    let omega = state.spdc().omega();
    let beta0 = units::resonance_beta(0, omega);
    let mut hi = report.beta_center + 0.45 * beta0;
    if ds_on_family(state, hi)? <= HALF_DIP_LEVEL {
        hi = report.beta_center + 0.95 * beta0;
        if ds_on_family(state, hi)? <= HALF_DIP_LEVEL {
            return Err(ResonanceError::FlankNotCrossed { level: HALF_DIP_LEVEL });
        }
    }
    let beta_h = bisect(
        |beta| Ok(ds_on_family(state, beta)? - HALF_DIP_LEVEL),
        report.beta_center,
        hi,
        beta0 * CENTER_REFINEMENT,
    )?;
    let hwhm = beta_h - report.beta_center;
    report.hwhm_beta = Some(hwhm);
    report.hwhm_epsilon = Some(hwhm * 2.0 * omega / PI);
    report.hwhm_delta_l = Some(units::path_difference_from_beta(hwhm));
    Ok(())
}

/// Measures the Schmidt-number peak half-width at half prominence.
///
/// The crossing level is (K_baseline + K_peak)/2 with the unmodulated
/// Schmidt number as baseline. The curve is the dense eigensolve wherever
/// the truncation policy fits inside [`MAX_TRUNCATION`]; for still narrower
/// pumps the closed-form estimate stands in, with the peak re-read on that
/// curve so level and flank stay consistent. Fills `k_hwhm_beta` and
/// `wing_dip_depth`.
///
/// The wing dip is the entanglement *loss* immediately flanking the peak:
/// on the eigensolve curve the Schmidt number drops below the baseline
/// within ~0.01 β₀ of the center before recovering (approaching 5/6 of the
/// baseline for narrow pumps). The closed-form estimate has no such
/// feature, so the fallback instead reports its shallow mid-span
/// depression between neighboring resonances.
pub fn hwhm_k(state: &BiphotonState, report: &mut ResonanceReport) -> Result<(), ResonanceError> {
    let spdc = state.spdc();
    let k_baseline = mehler_params(spdc).k_standard();
    if report.k_at_center - k_baseline <= PROMINENCE_FLOOR * k_baseline {
        return Err(ResonanceError::PeakTooFlat {
            k_at_center: report.k_at_center,
            k_baseline,
        });
    }
    let numeric =
        truncation_dim(mehler_params(spdc).z, DEFAULT_TRUNCATION_TOL) < MAX_TRUNCATION;
    let k_peak = if numeric {
        report.k_at_center
    } else {
        k_on_family(state, report.beta_center, false)?
    };
    let level = 0.5 * (k_baseline + k_peak);
    let omega = spdc.omega();
    let beta0 = units::resonance_beta(0, omega);
    let step = 0.01 * beta0;
    let mut lo = report.beta_center;
    let mut hi = lo;
    let mut crossed = false;
    for _ in 0..50 {
        hi += step;
        if k_on_family(state, hi, numeric)? < level {
            crossed = true;
            break;
        }
        lo = hi;
    }
    if !crossed {
        return Err(ResonanceError::FlankNotCrossed { level });
    }
    let beta_k = bisect(
        |beta| Ok(k_on_family(state, beta, numeric)? - level),
        lo,
        hi,
        beta0 * CENTER_REFINEMENT,
    )?;
    report.k_hwhm_beta = Some(beta_k - report.beta_center);
    let (wing_lo, wing_hi) = if numeric {
        (beta_k, report.beta_center + 0.2 * beta0)
    } else {
        (report.beta_center + 0.2 * beta0, report.beta_center + 1.8 * beta0)
    };
    let (_, k_wing) = golden_min(
        |beta| k_on_family(state, beta, numeric),
        wing_lo,
        wing_hi,
        beta0 * WING_REFINEMENT,
    )?;
    report.wing_dip_depth = Some(k_wing - k_baseline);
    Ok(())
}

/// One row of the entanglement-vs-antibunching trade table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsVsKRow {
    /// Requested unmodulated Schmidt number.
    pub k: f64,
    /// Pump width realizing it for the given marginals.
    pub sigma_p: PumpWidth,
    /// Closed-form symmetry degree at the first resonance seed β₀.
    pub ds_at_resonance: f64,
}

/// Tabulates the resonant symmetry degree against the source entanglement.
///
/// Each requested K (every entry strictly above 1) is inverted to a pump
/// width, and the closed form is evaluated at the n = 0 seed β₀ = π/(2Ω)
/// with zero arrival-time delay. Toward K → 1⁺ the resonant symmetry
/// degree climbs to the separable value 0; growing K drives it
/// monotonically toward −1, saturating around K ≈ 8.
pub fn ds_vs_k_at_resonance(
    sigma1: f64,
    sigma2: f64,
    omega: f64,
    k_grid: &[f64],
) -> Result<Vec<DsVsKRow>, ResonanceError> {
    let beta0 = units::resonance_beta(0, omega);
    let modulation = ModulationSpec::cosine(beta0)?;
    let mut rows = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let sigma_p = sigma_p_from_k(k, sigma1, sigma2)?;
        let spdc = SpdcParams::new(sigma1, sigma2, sigma_p, omega, 0.0, 0.0)?;
        let probe = BiphotonState::new(spdc, modulation)?;
        rows.push(DsVsKRow { k, sigma_p, ds_at_resonance: ds_closed_modulated(&probe)?.d_s });
    }
    Ok(rows)
}

/// A modulator delay expressed on every equivalent experimental axis.
///
/// `delta_l` is the interferometer path difference 2cβ, `epsilon` the
/// relative detuning from the order-`order` resonance seed (so ε = 0 on
/// the seed and ε = ±1 on the neighboring even multiples of π/(2Ω)), and
/// `wavelength_fraction` the path difference in units of the carrier
/// wavelength 2πc/Ω. Conversions are exact rescalings and round-trip to
/// better than 1e−12.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaUnits {
    pub beta: f64,
    pub delta_l: f64,
    pub epsilon: f64,
    pub order: u32,
    pub wavelength_fraction: f64,
}

impl BetaUnits {
    /// Expands a delay in seconds; the order is the nearest resonance
    /// seed (ties between neighbors round to the higher order).
    pub fn from_beta(beta: f64, omega: f64) -> Self {
        let u = 2.0 * omega * beta / PI;
        let order = if u <= 1.0 { 0 } else { fm::floor(0.5 * (u - 1.0) + 0.5) as u32 };
        BetaUnits {
            beta,
            delta_l: units::path_difference_from_beta(beta),
            epsilon: units::epsilon_from_beta(beta, order, omega),
            order,
            wavelength_fraction: beta * omega / PI,
        }
    }

    /// Expands a path difference in meters.
    pub fn from_path_difference(delta_l: f64, omega: f64) -> Self {
        Self::from_beta(units::beta_from_path_difference(delta_l), omega)
    }

    /// Expands a detuning relative to the order-`order` seed. The given
    /// order is kept even when |ε| > 1 would re-anchor elsewhere, so the
    /// pair (ε, order) always round-trips.
    pub fn from_epsilon(epsilon: f64, order: u32, omega: f64) -> Self {
        let m = 2.0 * f64::from(order) + 1.0;
        let beta = (m + epsilon) * PI / (2.0 * omega);
        let mut expanded = Self::from_beta(beta, omega);
        expanded.order = order;
        expanded.epsilon = units::epsilon_from_beta(beta, order, omega);
        expanded
    }
}
