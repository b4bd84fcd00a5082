//! Schmidt decomposition of the biphoton amplitude.
//!
//! The double-Gaussian state separates exactly into harmonic-oscillator
//! modes with a geometric eigenvalue ladder λ_n = (1−z²)z^{2n}. Harmonic
//! modulation of one arm mixes that ladder; the mixed spectrum is recovered
//! here four ways: a dense eigensolve of the reduced one-photon density
//! matrix, the first-order diagonal of the same matrix, a Laguerre-rescaled
//! ladder, and a closed-form Schmidt-number estimate obtained by resumming
//! the rescaled ladder.

use crate::eigen::{eigenvalues_symmetric, EigenError};
use crate::fm;
use crate::jsa::{BiphotonState, ModulationKind, PumpWidth, SpdcParams};
use crate::specfun::{assoc_laguerre, bessel_i0_scaled, g_polynomial, SpecFunError};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Eigenvalue-tail tolerance behind the default truncation dimension.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

/// Hard cap on the truncation dimension as z → 1.
pub const MAX_TRUNCATION: usize = 4000;

/// Largest trace loss tolerated when the mode basis is truncated.
const TRACE_TOL: f64 = 1e-8;

/// The purity from eigenvalues and from the Frobenius norm must agree to
/// this absolute level.
const PURITY_CROSSCHECK_TOL: f64 = 1e-10;

/// Eigenvalues of the reduced density matrix may exceed [0, 1] by at most
/// this much before the matrix is declared non-positive.
const PSD_SLACK: f64 = 1e-10;

/// Norm denominators below this are treated as divergent.
const DEGENERACY_FLOOR: f64 = 1e-12;

/// Pump widths beyond this multiple of the broader marginal are reported as
/// infinite: past it z is numerically indistinguishable from the separable
/// limit and the inversion loses all significant digits anyway.
const INFINITE_PUMP_FACTOR: f64 = 1e3;

/// Errors from the Schmidt-spectrum routines.
#[derive(Debug, Clone, PartialEq)]
pub enum SchmidtError {
    /// The operation is defined for a specific modulation kind only.
    ModulationKindMismatch { required: &'static str },
    /// The operation needs the stated pump-width regime.
    PumpWidthMismatch { required: &'static str },
    /// No state generates this Schmidt number (k < 1), or k = 1 exactly,
    /// which is reached only in the infinite-pump limit.
    KOutOfRange { k: f64 },
    /// The mode basis lost more trace than allowed; retry with at least the
    /// suggested dimension.
    DimensionTooSmall { dim: usize, deficit: f64, suggested: usize },
    /// An eigenvalue of the reduced density matrix fell outside [0, 1] by
    /// more than round-off can explain.
    PsdViolation { eigenvalue: f64 },
    /// Purity from the eigenvalues disagrees with the Frobenius-norm route.
    PurityMismatch { from_eigenvalues: f64, from_frobenius: f64 },
    /// The modulated-state norm diverges at this delay parameter.
    DegenerateState { beta: f64 },
    /// Eigensolver failure.
    Eigen(EigenError),
    /// Special-function failure.
    SpecFun(SpecFunError),
}

impl fmt::Display for SchmidtError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchmidtError::ModulationKindMismatch { required } => {
                write!(f, "operation requires {required} modulation")
            }
            SchmidtError::PumpWidthMismatch { required } => {
                write!(f, "operation requires a {required} pump width")
            }
            SchmidtError::KOutOfRange { k } => {
                write!(f, "no finite pump width produces Schmidt number {k}")
            }
            SchmidtError::DimensionTooSmall { dim, deficit, suggested } => write!(
                f,
                "basis dimension {dim} loses trace {deficit:.3e}; retry with {suggested}"
            ),
            SchmidtError::PsdViolation { eigenvalue } => {
                write!(f, "density-matrix eigenvalue {eigenvalue:.3e} outside [0, 1]")
            }
            SchmidtError::PurityMismatch { from_eigenvalues, from_frobenius } => write!(
                f,
                "purity mismatch: eigenvalues give {from_eigenvalues:.16e}, \
                 Frobenius norm gives {from_frobenius:.16e}"
            ),
            SchmidtError::DegenerateState { beta } => {
                write!(f, "state norm diverges at delay parameter {beta:.6e} s")
            }
            SchmidtError::Eigen(e) => write!(f, "eigensolver: {e}"),
            SchmidtError::SpecFun(e) => write!(f, "special function: {e}"),
        }
    }
}

impl core::error::Error for SchmidtError {}

impl From<EigenError> for SchmidtError {
    fn from(e: EigenError) -> Self {
        SchmidtError::Eigen(e)
    }
}

impl From<SpecFunError> for SchmidtError {
    fn from(e: SpecFunError) -> Self {
        SchmidtError::SpecFun(e)
    }
}

/// Which route produced a spectrum or Schmidt-number estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchmidtMethod {
    /// Geometric ladder of the unmodulated state.
    ExactGeometric,
    /// Dense eigensolve of the reduced density matrix.
    NumericDiag,
    /// Diagonal of the reduced density matrix.
    Perturbative,
    /// Laguerre-rescaled ladder.
    Heuristic,
    /// Closed-form resummation (carries no eigenvalues).
    ApproxClosed,
}

impl SchmidtMethod {
    pub fn label(self) -> &'static str {
        match self {
            SchmidtMethod::ExactGeometric => "exact_geometric",
            SchmidtMethod::NumericDiag => "numeric_diag",
            SchmidtMethod::Perturbative => "perturbative",
            SchmidtMethod::Heuristic => "heuristic",
            SchmidtMethod::ApproxClosed => "approx_closed",
        }
    }
}

/// Width and correlation parameters of the oscillator-mode decomposition,
/// with the constants that govern the modulated state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MehlerParams {
    /// Mode-width scale of the first photon, rad/s.
    pub s1: f64,
    /// Mode-width scale of the second photon, rad/s.
    pub s2: f64,
    /// Geometric correlation parameter, 0 ≤ z < 1.
    pub z: f64,
    /// Squared width of the modulated-arm marginal, (rad/s)².
    pub alpha_sq: f64,
    /// Pump-referred squared width ratio, dimensionless.
    pub gamma_sq: f64,
    /// Squared reduced width ξ², (rad/s)².
    pub xi_sq: f64,
    /// Squared norm correction of the modulated state (1 when β = 0).
    pub n_tilde_sq: f64,
    /// 1 − z² kept in product form: as z → 1 the difference would lose the
    /// digits every downstream ratio depends on.
    one_minus_z_sq: f64,
}

impl MehlerParams {
    /// Schmidt number of the unmodulated ladder, (1+z²)/(1−z²).
    pub fn k_standard(&self) -> f64 {
        (1.0 + self.z * self.z) / self.one_minus_z_sq
    }

    /// 1 − z² in cancellation-free form.
    pub fn one_minus_z_sq(&self) -> f64 {
        self.one_minus_z_sq
    }

    fn check_marginal_identity(&self) {
        let reconstructed =
            self.s1 * self.s1 * (1.0 + self.z * self.z) / self.one_minus_z_sq;
        let rel = fm::abs(reconstructed - self.alpha_sq) / self.alpha_sq;
        assert!(
            rel < 1e-9,
            "mode widths violate the marginal identity α² = s₁²(1+z²)/(1−z²)"
        );
    }
}

/// 1 + c·e^{−a} for a ≥ 0, grouped as (1 − e^{−a}) + (1+c)e^{−a} so both
/// addends are nonnegative and the limit c → −1, a → 0 keeps full precision.
/// Callers pass 1+c in whatever exact form they have for it.
fn one_plus_damped(one_plus_c: f64, a: f64) -> f64 {
    -fm::expm1(-a) + one_plus_c * fm::exp(-a)
}

/// Oscillator-mode parameters of an unmodulated state (norm correction 1).
///
/// An infinite pump yields the separable record s₁ = σ₁, s₂ = σ₂, z = 0.
pub fn mehler_params(spdc: &SpdcParams) -> MehlerParams {
    let xi_sq = spdc.xi_sq();
    let alpha_sq = spdc.alpha_sq();
    let gamma_sq = spdc.gamma_sq();
    let sp = match spdc.sigma_p() {
        PumpWidth::Infinite => {
            return MehlerParams {
                s1: spdc.sigma1(),
                s2: spdc.sigma2(),
                z: 0.0,
                alpha_sq,
                gamma_sq,
                xi_sq,
                n_tilde_sq: 1.0,
                one_minus_z_sq: 1.0,
            };
        }
        PumpWidth::Finite(v) => v,
    };
    let q1 = spdc.sigma1() * spdc.sigma1();
    let q2 = spdc.sigma2() * spdc.sigma2();
    let p2 = sp * sp;
    let total = q1 + q2 + p2;
    // d = √((σ₁²+σ_p²)(σ₂²+σ_p²)/(σ₁²+σ₂²+σ_p²)); then z² = (d−σ_p)/(d+σ_p),
    // rewritten through d²−σ_p² = σ₁²σ₂²/(σ₁²+σ₂²+σ_p²) to dodge the
    // subtraction that goes degenerate for broad pumps.
    let d = fm::sqrt((q1 + p2) * (q2 + p2) / total);
    let z_sq = q1 * q2 / (total * (d + sp) * (d + sp));
    let one_minus_z_sq = 2.0 * sp / (d + sp);
    let s1 = spdc.sigma1() * fm::sqrt(sp) * fm::powf(q2 + p2, 0.25)
        / (fm::powf(q1 + p2, 0.25) * fm::powf(total, 0.25));
    let s2 = s1 * (spdc.sigma2() / spdc.sigma1()) * fm::sqrt((q1 + p2) / (q2 + p2));
    let params = MehlerParams {
        s1,
        s2,
        z: fm::sqrt(z_sq),
        alpha_sq,
        gamma_sq,
        xi_sq,
        n_tilde_sq: 1.0,
        one_minus_z_sq,
    };
    params.check_marginal_identity();
    params
}

/// Oscillator-mode parameters carrying the norm correction
/// Ñ² = 2/(1 + cos(2βΩ)e^{−β²α²}) of a cosine-modulated state.
///
/// # Errors
///
/// `ModulationKindMismatch` unless the state is cosine-modulated;
/// `DegenerateState` if the norm denominator vanishes.
pub fn mehler_params_modulated(state: &BiphotonState) -> Result<MehlerParams, SchmidtError> {
    require_cosine(state)?;
    let mut params = mehler_params(state.spdc());
    let beta = state.modulation().beta();
    let cp = fm::cos(beta * state.spdc().omega());
    let denom = one_plus_damped(2.0 * cp * cp, beta * beta * params.alpha_sq);
    if denom < DEGENERACY_FLOOR {
        return Err(SchmidtError::DegenerateState { beta });
    }
    params.n_tilde_sq = 2.0 / denom;
    Ok(params)
}

/// Number of ladder terms needed before the eigenvalue tail z^{2N} drops
/// below `tol`, capped at [`MAX_TRUNCATION`].
///
/// # Examples
///
/// ```
/// use biphoton_core::schmidt::truncation_dim;
/// assert_eq!(truncation_dim(0.0, 1e-10), 1);
/// assert_eq!(truncation_dim(0.5, 1e-6), 10);
/// ```
pub fn truncation_dim(z: f64, tol: f64) -> usize {
    debug_assert!((0.0..1.0).contains(&z));
    debug_assert!(tol > 0.0 && tol < 1.0);
    if z == 0.0 {
        return 1;
    }
    let n = fm::ln(tol) / (2.0 * fm::ln(z));
    if !(n < MAX_TRUNCATION as f64) {
        return MAX_TRUNCATION;
    }
    let dim = fm::ceil(n) as usize;
    dim.max(1)
}

/// A truncated Schmidt spectrum with its entanglement number.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    /// Eigenvalues in decreasing order, each in (0, 1].
    pub eigenvalues: Vec<f64>,
    /// Basis dimension the spectrum was computed in.
    pub truncation: usize,
    /// 1 − Σλ: probability mass the truncation (or, for the diagonal
    /// estimate, the method itself) failed to capture.
    pub trace_deficit: f64,
    /// Schmidt number K = 1/Σλ².
    pub k: f64,
    /// Which route produced the spectrum.
    pub method: SchmidtMethod,
}

/// Exact geometric spectrum λ_n = (1−z²)z^{2n} of an unmodulated state,
/// truncated once the eigenvalue tail drops below `tol`.
///
/// K is stored from the closed form (1+z²)/(1−z²); while the truncation
/// stays under [`MAX_TRUNCATION`] the partial sums reproduce it to 1e−10.
/// When the cap binds (pumps narrower than ≈0.002σ₁) the spectrum keeps its
/// honest trace deficit and K remains the closed-form value.
pub fn schmidt_standard(spdc: &SpdcParams, tol: f64) -> SchmidtSpectrum {
    let params = mehler_params(spdc);
    let z_sq = params.z * params.z;
    let dim = truncation_dim(params.z, tol);
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut lambda = params.one_minus_z_sq;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..dim {
        eigenvalues.push(lambda);
        sum += lambda;
        sum_sq += lambda * lambda;
        lambda *= z_sq;
    }
    let k = params.k_standard();
    let tail = lambda / params.one_minus_z_sq;
    if tail <= 1e-6 {
        let k_sum = 1.0 / sum_sq;
        debug_assert!(
            fm::abs(k_sum - k) <= 1e-10 * k,
            "geometric Schmidt number drifted from its partial sums"
        );
    }
    SchmidtSpectrum {
        eigenvalues,
        truncation: dim,
        trace_deficit: (1.0 - sum).max(0.0),
        k,
        method: SchmidtMethod::ExactGeometric,
    }
}

/// Pump width that produces Schmidt number `k` for the given marginal
/// widths: σ_p² = √((σ₁²+σ₂²)²/4 + σ₁²σ₂²/(k²−1)) − (σ₁²+σ₂²)/2, evaluated
/// in the subtraction-free form B/(√(A²+B) + A).
///
/// # Errors
///
/// `KOutOfRange` for non-finite k or k ≤ 1; k = 1 is reached only in the
/// infinite-pump limit, and widths beyond 10³ times the broader marginal
/// are reported as `PumpWidth::Infinite` outright.
///
/// # Examples
///
/// ```
/// use biphoton_core::jsa::PumpWidth;
/// use biphoton_core::schmidt::sigma_p_from_k;
/// let sigma = 6.2832e13;
/// let Ok(PumpWidth::Finite(sp)) = sigma_p_from_k(2.0, sigma, sigma) else {
///     panic!("K = 2 has a finite pump width");
/// };
/// assert!((sp / sigma - 0.39331989319032856).abs() < 1e-12);
/// ```
pub fn sigma_p_from_k(k: f64, sigma1: f64, sigma2: f64) -> Result<PumpWidth, SchmidtError> {
    if !k.is_finite() || k <= 1.0 {
        return Err(SchmidtError::KOutOfRange { k });
    }
    debug_assert!(sigma1 > 0.0 && sigma2 > 0.0);
    let q1 = sigma1 * sigma1;
    let q2 = sigma2 * sigma2;
    let a = 0.5 * (q1 + q2);
    let b = q1 * q2 / ((k - 1.0) * (k + 1.0));
    let sigma_p = fm::sqrt(b / (fm::sqrt(a * a + b) + a));
    if sigma_p > INFINITE_PUMP_FACTOR * sigma1.max(sigma2) {
        return Ok(PumpWidth::Infinite);
    }
    Ok(PumpWidth::Finite(sigma_p))
}

/// The real factor left of ½(e^{iβΩ}·i^{|p−n|} + c.c.):
/// cos(βΩ), −sin(βΩ), −cos(βΩ), +sin(βΩ) for |p−n| mod 4 = 0, 1, 2, 3.
fn trig_parity_factor(distance: usize, beta_omega: f64) -> f64 {
    match distance % 4 {
        0 => fm::cos(beta_omega),
        1 => -fm::sin(beta_omega),
        2 => -fm::cos(beta_omega),
        _ => fm::sin(beta_omega),
    }
}

/// Overlap ⟨φ_p|φ̃_n⟩ between a mode of the bare ladder and a
/// cosine-modulated one: the parity factor above times the displacement
/// element √(r!/s!)·(βs₁/√2)^{s−r}·L_r^{(s−r)}(β²s₁²/2)·e^{−β²s₁²/4} with
/// s = max(p,n), r = min(p,n). Always real; δ_pn at β = 0.
pub fn scalar_product_basis(
    p: u32,
    n: u32,
    beta: f64,
    mehler: &MehlerParams,
    omega: f64,
) -> f64 {
    let x = 0.5 * beta * beta * mehler.s1 * mehler.s1;
    let radial = g_polynomial(p, n, x).expect("β²s₁²/2 is nonnegative");
    let distance = if p >= n { p - n } else { n - p };
    trig_parity_factor(distance as usize, beta * omega) * radial * fm::exp(-0.5 * x)
}

/// All overlaps ⟨φ_p|φ̃_n⟩ for p, n < dim (row-major), built column by
/// column from the displacement recurrence
/// W_{p,n+1} = (√p·W_{p−1,n} ± t·W_{p,n})/√(n+1), t = βs₁/√2,
/// with + for p ≤ n and − for p > n.
fn scalar_product_matrix(dim: usize, beta: f64, s1: f64, omega: f64) -> Vec<f64> {
    debug_assert!(dim >= 1);
    let t = beta * s1 / core::f64::consts::SQRT_2;
    let x = t * t;
    let mut w = vec![0.0; dim * dim];
    if t == 0.0 {
        // the recurrence would only smear √p·(1/√p) rounding over an
        // identity matrix
        for p in 0..dim {
            w[p * dim + p] = 1.0;
        }
        return w;
    }
    w[0] = fm::exp(-0.5 * x);
    for p in 1..dim {
        w[p * dim] = w[(p - 1) * dim] * t / fm::sqrt(p as f64);
    }
    for n in 0..dim.saturating_sub(1) {
        let inv = 1.0 / fm::sqrt((n + 1) as f64);
        w[n + 1] = t * w[n] * inv;
        for p in 1..dim {
            let raise = fm::sqrt(p as f64) * w[(p - 1) * dim + n];
            let same = t * w[p * dim + n];
            w[p * dim + n + 1] =
                if p <= n { (raise + same) * inv } else { (raise - same) * inv };
        }
    }
    let beta_omega = beta * omega;
    let factors = [
        fm::cos(beta_omega),
        -fm::sin(beta_omega),
        -fm::cos(beta_omega),
        fm::sin(beta_omega),
    ];
    for p in 0..dim {
        for n in 0..dim {
            let distance = if p >= n { p - n } else { n - p };
            w[p * dim + n] *= factors[distance % 4];
        }
    }
    w
}

fn require_cosine(state: &BiphotonState) -> Result<(), SchmidtError> {
    if state.modulation().kind() != ModulationKind::Cosine {
        return Err(SchmidtError::ModulationKindMismatch { required: "cosine" });
    }
    Ok(())
}

fn require_finite_pump(spdc: &SpdcParams) -> Result<f64, SchmidtError> {
    spdc.sigma_p()
        .finite()
        .ok_or(SchmidtError::PumpWidthMismatch { required: "finite" })
}

fn check_dim(dim: usize, fallback: usize) -> Result<(), SchmidtError> {
    if dim == 0 {
        return Err(SchmidtError::DimensionTooSmall {
            dim: 0,
            deficit: 1.0,
            suggested: fallback,
        });
    }
    Ok(())
}

/// One-photon reduced density matrix of a cosine-modulated state in the
/// oscillator basis of the unmodulated ladder:
/// ρ_pq = Ñ²·Σ_n λ_n·⟨φ_p|φ̃_n⟩⟨φ_q|φ̃_n⟩, flattened dim×dim row-major.
///
/// # Errors
///
/// `DimensionTooSmall` when the basis loses more than 1e−8 of the trace;
/// the error carries a dimension to retry with. Modulation and norm
/// preconditions as in [`mehler_params_modulated`].
pub fn reduced_density_matrix(
    state: &BiphotonState,
    dim: usize,
) -> Result<Vec<f64>, SchmidtError> {
    let params = mehler_params_modulated(state)?;
    let policy = truncation_dim(params.z, DEFAULT_TRUNCATION_TOL);
    check_dim(dim, policy)?;
    let overlaps = scalar_product_matrix(
        dim,
        state.modulation().beta(),
        params.s1,
        state.spdc().omega(),
    );
    // Column-contiguous copy: the accumulation walks fixed n across all p.
    let mut columns = vec![0.0; dim * dim];
    for p in 0..dim {
        for n in 0..dim {
            columns[n * dim + p] = overlaps[p * dim + n];
        }
    }
    let z_sq = params.z * params.z;
    let mut rho = vec![0.0; dim * dim];
    let mut lambda = params.n_tilde_sq * params.one_minus_z_sq;
    for n in 0..dim {
        let column = &columns[n * dim..(n + 1) * dim];
        for p in 0..dim {
            let weighted = lambda * column[p];
            if weighted == 0.0 {
                continue;
            }
            let row = &mut rho[p * dim..(p + 1) * dim];
            for q in p..dim {
                row[q] += weighted * column[q];
            }
        }
        lambda *= z_sq;
    }
    for p in 1..dim {
        for q in 0..p {
            rho[p * dim + q] = rho[q * dim + p];
        }
    }
    let mut trace = 0.0;
    for p in 0..dim {
        trace += rho[p * dim + p];
    }
    let deficit = 1.0 - trace;
    if deficit > TRACE_TOL {
        return Err(SchmidtError::DimensionTooSmall {
            dim,
            deficit,
            suggested: policy.max(2 * dim),
        });
    }
    Ok(rho)
}

/// Schmidt spectrum of a cosine-modulated state by dense symmetric
/// eigensolve of [`reduced_density_matrix`] at the default truncation.
///
/// The purity is computed twice — from the eigenvalues and from the squared
/// Frobenius norm of the matrix — and the two must agree to 1e−10 before
/// K = 1/Σλ² is reported.
///
/// # Errors
///
/// Preconditions of [`reduced_density_matrix`] plus a finite pump;
/// `PsdViolation` / `PurityMismatch` when the eigensolve contradicts a
/// density matrix; `Eigen` on solver failure.
pub fn schmidt_numeric(state: &BiphotonState) -> Result<SchmidtSpectrum, SchmidtError> {
    require_cosine(state)?;
    require_finite_pump(state.spdc())?;
    let params = mehler_params_modulated(state)?;
    let dim = truncation_dim(params.z, DEFAULT_TRUNCATION_TOL);
    let rho = reduced_density_matrix(state, dim)?;
    let mut frobenius_sq = 0.0;
    for v in &rho {
        frobenius_sq += v * v;
    }
    let mut ascending = eigenvalues_symmetric(&rho, dim)?;
    ascending.reverse();
    let mut eigenvalues = Vec::with_capacity(dim);
    for lambda in ascending {
        if lambda > 1.0 + PSD_SLACK || lambda < -PSD_SLACK {
            return Err(SchmidtError::PsdViolation { eigenvalue: lambda });
        }
        if lambda > 1.0 {
            eigenvalues.push(1.0);
        } else if lambda > 0.0 {
            eigenvalues.push(lambda);
        }
        // round-off negatives are clipped to zero and dropped
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for lambda in &eigenvalues {
        sum += lambda;
        sum_sq += lambda * lambda;
    }
    if fm::abs(sum_sq - frobenius_sq) > PURITY_CROSSCHECK_TOL {
        return Err(SchmidtError::PurityMismatch {
            from_eigenvalues: sum_sq,
            from_frobenius: frobenius_sq,
        });
    }
    Ok(SchmidtSpectrum {
        eigenvalues,
        truncation: dim,
        trace_deficit: (1.0 - sum).max(0.0),
        k: 1.0 / sum_sq,
        method: SchmidtMethod::NumericDiag,
    })
}

/// First-order Schmidt spectrum: the diagonal λ̃_m = Ñ²·Σ_n λ_n⟨φ_m|φ̃_n⟩²
/// of the reduced density matrix, sorted descending. The normalization
/// deficit is reported raw — it measures the weight this order misplaces —
/// rather than being renormalized away.
///
/// # Errors
///
/// Modulation, pump, and norm preconditions as in [`schmidt_numeric`].
pub fn schmidt_perturbative(
    state: &BiphotonState,
    dim: usize,
) -> Result<SchmidtSpectrum, SchmidtError> {
    let params = mehler_params_modulated(state)?;
    require_finite_pump(state.spdc())?;
    check_dim(dim, truncation_dim(params.z, DEFAULT_TRUNCATION_TOL))?;
    let overlaps = scalar_product_matrix(
        dim,
        state.modulation().beta(),
        params.s1,
        state.spdc().omega(),
    );
    let z_sq = params.z * params.z;
    let mut eigenvalues = Vec::with_capacity(dim);
    for p in 0..dim {
        let row = &overlaps[p * dim..(p + 1) * dim];
        let mut lambda = params.one_minus_z_sq;
        let mut acc = 0.0;
        for value in row {
            acc += lambda * value * value;
            lambda *= z_sq;
        }
        let scaled = params.n_tilde_sq * acc;
        if scaled > 0.0 {
            eigenvalues.push(scaled);
        }
    }
    finish_spectrum(eigenvalues, dim, SchmidtMethod::Perturbative)
}

/// Laguerre-rescaled ladder
/// λ̃_m = λ_m·[1 + e^{−β²s₁²}cos(2βΩ)L_m(2β²s₁²)] / [1 + e^{−β²α²}cos(2βΩ)],
/// sorted descending. The marginal identity α² = s₁²(1+z²)/(1−z²) makes the
/// rescaling redistribute weight without breaking Σλ̃ = 1, and the envelope
/// bound |L_m(y)| ≤ e^{y/2} keeps every entry nonnegative.
///
/// # Errors
///
/// Modulation, pump, and norm preconditions as in [`schmidt_numeric`].
pub fn schmidt_heuristic(
    state: &BiphotonState,
    dim: usize,
) -> Result<SchmidtSpectrum, SchmidtError> {
    let params = mehler_params_modulated(state)?;
    require_finite_pump(state.spdc())?;
    check_dim(dim, truncation_dim(params.z, DEFAULT_TRUNCATION_TOL))?;
    let beta = state.modulation().beta();
    let cp = fm::cos(beta * state.spdc().omega());
    let cos_two = 2.0 * cp * cp - 1.0;
    let y = 2.0 * beta * beta * params.s1 * params.s1;
    let envelope = fm::exp(-0.5 * y);
    let z_sq = params.z * params.z;
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut lambda = params.one_minus_z_sq;
    for m in 0..dim {
        let factor = 1.0 + envelope * cos_two * assoc_laguerre(m as u32, 0, y);
        let scaled = 0.5 * params.n_tilde_sq * lambda * factor;
        if scaled > 0.0 {
            eigenvalues.push(scaled);
        }
        lambda *= z_sq;
    }
    finish_spectrum(eigenvalues, dim, SchmidtMethod::Heuristic)
}

fn finish_spectrum(
    mut eigenvalues: Vec<f64>,
    dim: usize,
    method: SchmidtMethod,
) -> Result<SchmidtSpectrum, SchmidtError> {
    eigenvalues.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for lambda in &eigenvalues {
        sum += lambda;
        sum_sq += lambda * lambda;
    }
    Ok(SchmidtSpectrum {
        eigenvalues,
        truncation: dim,
        trace_deficit: (1.0 - sum).max(0.0),
        k: 1.0 / sum_sq,
        method,
    })
}

/// I₀(b) − 1 summed directly: Σ_{k≥1} (b²/4)^k/(k!)², free of the
/// cancellation the subtraction suffers at small b.
fn bessel_i0_minus_one(b: f64) -> f64 {
    let q = 0.25 * b * b;
    let mut term = q;
    let mut sum = 0.0;
    let mut k = 1.0;
    while term > sum * 1e-17 + 1e-300 {
        sum += term;
        k += 1.0;
        term *= q / (k * k);
    }
    sum
}

/// Closed-form Schmidt number of a cosine-modulated state:
/// K̃ = K₀·(1 + e^{−β²α²}cos2βΩ)² / [(1+R)² + R²(I₀(4η²z²) − 1)] with
/// R = cos(2βΩ)e^{−η²(1+z⁴)} and η² = β²s₁²/(1−z⁴) — the resummation of the
/// rescaled-ladder purity, so it matches [`schmidt_heuristic`] exactly up
/// to truncation. Both denominator terms are nonnegative; near resonance
/// they and the numerator shrink together toward a doubled peak value.
///
/// The rescaled ladder drops the two-mode coherences of the full density
/// matrix, so on the antibunching resonances this estimate rises to 2K₀
/// while [`schmidt_numeric`] saturates at (4/3)K₀ in the narrow-pump limit
/// — a factor-3/2 overshoot at the peak. Away from the resonances, and for
/// pumps as broad as the marginals, the two agree to a few percent, and the
/// estimate places the β-locations of the extrema correctly.
///
/// # Errors
///
/// Modulation, pump, and norm preconditions as in [`schmidt_numeric`].
pub fn approx_k_closed(state: &BiphotonState) -> Result<f64, SchmidtError> {
    let params = mehler_params_modulated(state)?;
    require_finite_pump(state.spdc())?;
    let beta = state.modulation().beta();
    let cp = fm::cos(beta * state.spdc().omega());
    let one_plus_cos_two = 2.0 * cp * cp;
    let cos_two = one_plus_cos_two - 1.0;
    let z_sq = params.z * params.z;
    let one_minus_z4 = params.one_minus_z_sq * (1.0 + z_sq);
    let eta_sq = beta * beta * params.s1 * params.s1 / one_minus_z4;
    let damping = eta_sq * (1.0 + z_sq * z_sq);
    let bessel_arg = 4.0 * eta_sq * z_sq;
    let numerator = one_plus_damped(one_plus_cos_two, beta * beta * params.alpha_sq);
    let one_plus_r = one_plus_damped(one_plus_cos_two, damping);
    // e^{−2·damping}·(I₀(b) − 1): series below b = 18, scaled Bessel above,
    // using 2·damping − b = 2η²(1−z²)² ≥ 0 to keep the exponents tame.
    let spread = if bessel_arg <= 18.0 {
        fm::exp(-2.0 * damping) * bessel_i0_minus_one(bessel_arg)
    } else {
        let scaled = bessel_i0_scaled(bessel_arg);
        fm::exp(bessel_arg - 2.0 * damping) * scaled - fm::exp(-2.0 * damping)
    };
    let denominator = one_plus_r * one_plus_r + cos_two * cos_two * spread;
    if !(denominator > DEGENERACY_FLOOR * DEGENERACY_FLOOR) {
        return Err(SchmidtError::DegenerateState { beta });
    }
    Ok(params.k_standard() * numerator * numerator / denominator)
}

/// Narrow-pump simplification of [`approx_k_closed`] around the baseline
/// K₀ → ξ/σ_p:
/// K̃ = (ξ/σ_p)·(1 + c − β²ξ²c)² / [(1 + c − β²ξ²c/2)² + c²β⁴ξ⁴/4],
/// c = cos2βΩ. Exactly 2ξ/σ_p at the resonances. The second value reports
/// whether the call sits inside the regime the expansion assumes
/// (σ_p ≤ 0.1σ₁ and β²ξ² ≤ 0.1).
///
/// # Errors
///
/// `ModulationKindMismatch` unless cosine-modulated; `PumpWidthMismatch`
/// for an infinite pump; `DegenerateState` if the denominator vanishes.
pub fn approx_k_small_sigma_p(state: &BiphotonState) -> Result<(f64, bool), SchmidtError> {
    require_cosine(state)?;
    let spdc = state.spdc();
    let sigma_p = require_finite_pump(spdc)?;
    let beta = state.modulation().beta();
    let cp = fm::cos(beta * spdc.omega());
    let cp_sq = cp * cp;
    let cos_two = 2.0 * cp_sq - 1.0;
    let xi_sq = spdc.xi_sq();
    let depth = beta * beta * xi_sq;
    // 1 + c(1 − m·depth) regrouped as 2cos²(βΩ)(1 − m·depth) + m·depth:
    // both addends nonnegative through the resonance when m·depth ≤ 1.
    let numerator = 2.0 * cp_sq * (1.0 - depth) + depth;
    let flank = 2.0 * cp_sq * (1.0 - 0.5 * depth) + 0.5 * depth;
    let denominator = flank * flank + 0.25 * cos_two * cos_two * depth * depth;
    if !(denominator > DEGENERACY_FLOOR * DEGENERACY_FLOOR) {
        return Err(SchmidtError::DegenerateState { beta });
    }
    let baseline = fm::sqrt(xi_sq) / sigma_p;
    let in_regime = sigma_p <= 0.1 * spdc.sigma1() && depth <= 0.1;
    Ok((baseline * numerator * numerator / denominator, in_regime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsa::ModulationSpec;
    use crate::specfun::{bessel_i0, make_quadrature, oscillator_eigenfunction, QuadratureKind};
    use alloc::format;
    use core::f64::consts::PI;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const OMEGA: f64 = 2.0 * PI * 844.5e12;

    fn thz(v: f64) -> f64 {
        2.0 * PI * v * 1e12
    }

    fn spdc(sigma1: f64, sigma2: f64, pump: PumpWidth, delta_tau: f64) -> SpdcParams {
        SpdcParams::new(sigma1, sigma2, pump, OMEGA, -0.5 * delta_tau, 0.5 * delta_tau)
            .expect("valid test parameters")
    }

    fn cosine_state(params: SpdcParams, beta: f64) -> BiphotonState {
        BiphotonState::new(params, ModulationSpec::cosine(beta).expect("beta >= 0"))
            .expect("valid test state")
    }

    fn beta_resonance(order: u32) -> f64 {
        PI * (2.0 * f64::from(order) + 1.0) / (2.0 * OMEGA)
    }

    #[test]
    fn mehler_params_at_symmetric_point() {
        let sigma = thz(10.0);
        let params = mehler_params(&spdc(sigma, sigma, PumpWidth::Finite(sigma), 0.0));
        let expected_s = sigma * 0.7598356856515925;
        assert!((params.s1 / expected_s - 1.0).abs() < 1e-14);
        assert!((params.s2 / expected_s - 1.0).abs() < 1e-14);
        assert!((params.z * params.z - 0.07179676972449123).abs() < 1e-14);
        assert!((params.k_standard() - 1.1547005383792515).abs() < 1e-13);
        assert_eq!(params.n_tilde_sq, 1.0);
        assert!((params.one_minus_z_sq() + params.z * params.z - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mehler_params_infinite_pump_is_separable() {
        let s1 = thz(10.0);
        let s2 = thz(17.0);
        let params = mehler_params(&spdc(s1, s2, PumpWidth::Infinite, 0.0));
        assert_eq!(params.z, 0.0);
        assert_eq!(params.s1, s1);
        assert_eq!(params.s2, s2);
        assert_eq!(params.k_standard(), 1.0);
        let spectrum = schmidt_standard(
            &spdc(s1, s2, PumpWidth::Infinite, 0.0),
            DEFAULT_TRUNCATION_TOL,
        );
        assert_eq!(spectrum.eigenvalues, vec![1.0]);
        assert_eq!(spectrum.k, 1.0);
        assert_eq!(spectrum.trace_deficit, 0.0);
    }

    #[test]
    fn correlation_parameter_decreases_with_pump_width() {
        let sigma = thz(10.0);
        let mut previous = f64::INFINITY;
        for ratio in [0.01, 0.05, 0.2, 1.0, 3.0, 10.0, 100.0] {
            let params =
                mehler_params(&spdc(sigma, sigma, PumpWidth::Finite(ratio * sigma), 0.0));
            assert!(params.z < previous, "z must fall as the pump broadens");
            assert!(params.z > 0.0);
            previous = params.z;
        }
    }

    #[test]
    fn modulated_norm_reduces_to_one_at_zero_delay() {
        let sigma = thz(10.0);
        let state = cosine_state(spdc(sigma, sigma, PumpWidth::Finite(0.1 * sigma), 0.0), 0.0);
        let params = mehler_params_modulated(&state).unwrap();
        assert_eq!(params.n_tilde_sq, 1.0);

        let beta = beta_resonance(0);
        let resonant = cosine_state(spdc(sigma, sigma, PumpWidth::Finite(0.1 * sigma), 0.0), beta);
        let params = mehler_params_modulated(&resonant).unwrap();
        let direct = 2.0
            / (1.0
                + fm::cos(2.0 * beta * OMEGA) * fm::exp(-beta * beta * params.alpha_sq));
        assert!((params.n_tilde_sq / direct - 1.0).abs() < 1e-9);
        assert!(params.n_tilde_sq > 1e3);
    }

    #[test]
    fn mode_ladder_reconstructs_the_amplitude() {
        let sigma = thz(10.0);
        let cases = [
            spdc(sigma, sigma, PumpWidth::Finite(sigma), 0.0),
            SpdcParams::new(
                sigma,
                2.0 * sigma,
                PumpWidth::Finite(0.7 * sigma),
                OMEGA,
                3.0e-15,
                -2.0e-15,
            )
            .unwrap(),
        ];
        for params in cases {
            let state = BiphotonState::new(params, ModulationSpec::none()).unwrap();
            let modes = mehler_params(&params);
            let terms = truncation_dim(modes.z, 1e-22);
            let prefactor = fm::sqrt(modes.one_minus_z_sq() / (modes.s1 * modes.s2));
            let peak = state.evaluate(OMEGA, OMEGA).norm();
            for i in 0..5 {
                for j in 0..5 {
                    let omega1 = OMEGA + (i as f64 - 2.0) * 0.75 * sigma;
                    let omega2 = OMEGA + (j as f64 - 2.0) * 0.75 * sigma;
                    let x = (omega1 - OMEGA) / modes.s1;
                    let y = (OMEGA - omega2) / modes.s2;
                    let mut sum = 0.0;
                    let mut zn = 1.0;
                    for n in 0..terms as u32 {
                        sum += zn
                            * oscillator_eigenfunction(n, x)
                            * oscillator_eigenfunction(n, y);
                        zn *= modes.z;
                    }
                    let phase = Complex64::from_polar(
                        1.0,
                        omega1 * params.tau1() + omega2 * params.tau2(),
                    );
                    let series = phase * prefactor * sum;
                    let direct = state.evaluate(omega1, omega2);
                    assert!(
                        (series - direct).norm() <= 1e-9 * peak,
                        "mode series drifted from the amplitude at ({i}, {j})"
                    );
                }
            }
        }
    }

    #[test]
    fn standard_spectrum_hits_known_schmidt_numbers() {
        let sigma = thz(10.0);
        let symmetric = schmidt_standard(
            &spdc(sigma, sigma, PumpWidth::Finite(sigma), 0.0),
            DEFAULT_TRUNCATION_TOL,
        );
        assert!((symmetric.k - 1.1547005383792515).abs() < 1e-13);
        assert_eq!(symmetric.truncation, 9);

        let narrow = schmidt_standard(
            &spdc(sigma, sigma, PumpWidth::Finite(0.01 * sigma), 0.0),
            DEFAULT_TRUNCATION_TOL,
        );
        assert!((narrow.k / 70.71598130903207 - 1.0).abs() < 1e-12);
        assert_eq!(narrow.truncation, 815);
    }

    #[test]
    fn standard_spectrum_is_normalized_geometric_ladder() {
        let sigma = thz(10.0);
        for ratio in [1.0, 0.1, 0.01] {
            let spectrum = schmidt_standard(
                &spdc(sigma, sigma, PumpWidth::Finite(ratio * sigma), 0.0),
                DEFAULT_TRUNCATION_TOL,
            );
            assert_eq!(spectrum.eigenvalues.len(), spectrum.truncation);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for pair in spectrum.eigenvalues.windows(2) {
                assert!(pair[0] > pair[1]);
            }
            for lambda in &spectrum.eigenvalues {
                assert!(*lambda > 0.0 && *lambda <= 1.0);
                sum += lambda;
                sum_sq += lambda * lambda;
            }
            assert!((sum + spectrum.trace_deficit - 1.0).abs() < 1e-12);
            assert!(spectrum.trace_deficit <= DEFAULT_TRUNCATION_TOL * 1.000001 + 1e-13);
            assert!((1.0 / sum_sq - spectrum.k).abs() <= 1e-10 * spectrum.k);
        }
    }

    #[test]
    fn standard_spectrum_reports_capped_truncation_honestly() {
        let sigma = thz(10.0);
        let spectrum = schmidt_standard(
            &spdc(sigma, sigma, PumpWidth::Finite(5e-4 * sigma), 0.0),
            DEFAULT_TRUNCATION_TOL,
        );
        assert_eq!(spectrum.truncation, MAX_TRUNCATION);
        assert!(spectrum.trace_deficit > 1e-4 && spectrum.trace_deficit < 1e-1);
        assert!((spectrum.k / 1414.2138275381242 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pump_width_from_schmidt_number_roundtrips() {
        let sigma1 = thz(10.0);
        for (k, sigma2) in [
            (1.001, sigma1),
            (1.1547005383792515, sigma1),
            (2.0, sigma1),
            (2.0, 3.0 * sigma1),
            (7.123990720171841, sigma1),
            (70.71598130903207, 0.6 * sigma1),
            (500.0, sigma1),
        ] {
            let pump = sigma_p_from_k(k, sigma1, sigma2).unwrap();
            let spectrum =
                schmidt_standard(&spdc(sigma1, sigma2, pump, 0.0), DEFAULT_TRUNCATION_TOL);
            assert!(
                (spectrum.k / k - 1.0).abs() < 1e-10,
                "roundtrip failed for K = {k}"
            );
        }

        let two = sigma_p_from_k(2.0, sigma1, sigma1).unwrap();
        let PumpWidth::Finite(value) = two else {
            panic!("K = 2 must give a finite width")
        };
        assert!((value / sigma1 - 0.39331989319032856).abs() < 1e-12);

        assert!(matches!(
            sigma_p_from_k(1.0, sigma1, sigma1),
            Err(SchmidtError::KOutOfRange { .. })
        ));
        assert!(matches!(
            sigma_p_from_k(0.5, sigma1, sigma1),
            Err(SchmidtError::KOutOfRange { .. })
        ));
        assert!(matches!(
            sigma_p_from_k(f64::NAN, sigma1, sigma1),
            Err(SchmidtError::KOutOfRange { .. })
        ));
        assert!(matches!(
            sigma_p_from_k(f64::INFINITY, sigma1, sigma1),
            Err(SchmidtError::KOutOfRange { .. })
        ));
        assert!(matches!(
            sigma_p_from_k(1.0 + 1e-13, sigma1, sigma1),
            Ok(PumpWidth::Infinite)
        ));
    }

    #[test]
    fn scalar_products_collapse_to_identity_without_delay() {
        let sigma = thz(10.0);
        let params = mehler_params(&spdc(sigma, sigma, PumpWidth::Finite(0.3 * sigma), 0.0));
        for p in 0..6u32 {
            for n in 0..6u32 {
                let value = scalar_product_basis(p, n, 0.0, &params, OMEGA);
                let expected = if p == n { 1.0 } else { 0.0 };
                assert_eq!(value, expected, "(p, n) = ({p}, {n})");
            }
        }
    }

    #[test]
    fn scalar_products_match_direct_quadrature() {
        let sigma = thz(10.0);
        let params = mehler_params(&spdc(sigma, 1.3 * sigma, PumpWidth::Finite(0.5 * sigma), 0.0));
        let beta = 0.9 * core::f64::consts::SQRT_2 / params.s1;
        let rule = make_quadrature(QuadratureKind::GaussHermite, 120).unwrap();
        for (p, n) in [(0, 0), (0, 1), (1, 3), (2, 2), (4, 1), (5, 5)] {
            let mut integral = 0.0;
            for (u, w) in rule.nodes().iter().zip(rule.weights()) {
                integral += w
                    * oscillator_eigenfunction(p, *u)
                    * fm::cos(beta * (OMEGA + params.s1 * u))
                    * oscillator_eigenfunction(n, *u);
            }
            let closed = scalar_product_basis(p, n, beta, &params, OMEGA);
            assert!(
                (closed - integral).abs() < 1e-10,
                "(p, n) = ({p}, {n}): closed {closed:.3e} vs quadrature {integral:.3e}"
            );
        }
    }

    #[test]
    fn recurrence_matrix_agrees_with_per_element_form() {
        let sigma = thz(10.0);
        let params = mehler_params(&spdc(sigma, sigma, PumpWidth::Finite(0.4 * sigma), 0.0));
        let beta = 1.7 / (params.s1 * core::f64::consts::SQRT_2);
        let dim = 12;
        let matrix = scalar_product_matrix(dim, beta, params.s1, OMEGA);
        for p in 0..dim {
            for n in 0..dim {
                let direct = scalar_product_basis(p as u32, n as u32, beta, &params, OMEGA);
                assert!(
                    (matrix[p * dim + n] - direct).abs() < 1e-12,
                    "(p, n) = ({p}, {n})"
                );
            }
        }
    }

    #[test]
    fn density_matrix_is_diagonal_without_delay() {
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.1 * sigma);
        let state = cosine_state(spdc(sigma, sigma, pump, 0.0), 0.0);
        let ladder = schmidt_standard(&spdc(sigma, sigma, pump, 0.0), DEFAULT_TRUNCATION_TOL);
        let dim = ladder.truncation;
        let rho = reduced_density_matrix(&state, dim).unwrap();
        for p in 0..dim {
            for q in 0..dim {
                if p == q {
                    assert_eq!(rho[p * dim + q], ladder.eigenvalues[p]);
                } else {
                    assert_eq!(rho[p * dim + q], 0.0);
                }
            }
        }
    }

    #[test]
    fn density_matrix_keeps_trace_and_positivity_on_resonance() {
        let sigma = thz(10.0);
        let state = cosine_state(
            spdc(sigma, sigma, PumpWidth::Finite(0.1 * sigma), 0.0),
            beta_resonance(0),
        );
        let params = mehler_params_modulated(&state).unwrap();
        let dim = truncation_dim(params.z, DEFAULT_TRUNCATION_TOL);
        let rho = reduced_density_matrix(&state, dim).unwrap();
        let mut trace = 0.0;
        for p in 0..dim {
            trace += rho[p * dim + p];
            for q in 0..dim {
                assert_eq!(rho[p * dim + q], rho[q * dim + p]);
            }
        }
        assert!((trace - 1.0).abs() < 1e-8);
        let eigenvalues = eigenvalues_symmetric(&rho, dim).unwrap();
        assert!(eigenvalues[0] >= -1e-10, "smallest eigenvalue {:.3e}", eigenvalues[0]);
    }

    #[test]
    fn density_matrix_rejects_undersized_basis() {
        let sigma = thz(10.0);
        let state = cosine_state(
            spdc(sigma, sigma, PumpWidth::Finite(0.1 * sigma), 0.0),
            beta_resonance(0),
        );
        let result = reduced_density_matrix(&state, 8);
        let Err(SchmidtError::DimensionTooSmall { dim, deficit, suggested }) = result else {
            panic!("an 8-mode basis cannot hold this state");
        };
        assert_eq!(dim, 8);
        assert!(deficit > 1e-8);
        assert!(suggested >= 82);
    }

    #[test]
    fn numeric_spectrum_matches_ladder_without_delay() {
        let sigma = thz(10.0);
        for ratio in [1.0, 0.1] {
            let pump = PumpWidth::Finite(ratio * sigma);
            let state = cosine_state(spdc(sigma, sigma, pump, 0.0), 0.0);
            let numeric = schmidt_numeric(&state).unwrap();
            let ladder =
                schmidt_standard(&spdc(sigma, sigma, pump, 0.0), DEFAULT_TRUNCATION_TOL);
            assert!((numeric.k / ladder.k - 1.0).abs() < 1e-10);
            assert!(numeric.eigenvalues.len() >= ladder.eigenvalues.len());
            for (a, b) in numeric.eigenvalues.iter().zip(&ladder.eigenvalues) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn numeric_resonant_enhancement_is_four_thirds() {
        // Closed-form purity of cos(βω₁)·Gaussian via 4D Gaussian moments:
        // at the first resonance the dense solve saturates at (4/3)K₀, the
        // weight the rescaled-ladder estimates misplace into their 2K₀ peak.
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.01 * sigma);
        let state = cosine_state(spdc(sigma, sigma, pump, 0.0), beta_resonance(0));
        let numeric = schmidt_numeric(&state).unwrap();
        assert!(
            (numeric.k / 94.297825 - 1.0).abs() < 1e-5,
            "resonant K = {:.6}",
            numeric.k
        );
        let baseline =
            schmidt_standard(&spdc(sigma, sigma, pump, 0.0), DEFAULT_TRUNCATION_TOL).k;
        assert!((numeric.k / baseline * 0.75 - 1.0).abs() < 1e-3);
        assert!(numeric.trace_deficit < 1e-8);

        // The diagonal estimate and the rescaled ladder do agree with each
        // other on the peak in the strongly entangled regime.
        let perturbative = schmidt_perturbative(&state, numeric.truncation).unwrap();
        let heuristic = schmidt_heuristic(&state, numeric.truncation).unwrap();
        assert!(
            (perturbative.k / heuristic.k - 1.0).abs() < 0.05,
            "diagonal estimate {:.4} vs rescaled ladder {:.4}",
            perturbative.k,
            heuristic.k
        );
        assert!((heuristic.k / (2.0 * baseline) - 1.0).abs() < 0.01);
    }

    #[test]
    fn numeric_schmidt_number_rests_at_baseline_off_resonance() {
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.01 * sigma);
        let midpoint = PI / OMEGA;
        let state = cosine_state(spdc(sigma, sigma, pump, 0.0), midpoint);
        let numeric = schmidt_numeric(&state).unwrap();
        let baseline =
            schmidt_standard(&spdc(sigma, sigma, pump, 0.0), DEFAULT_TRUNCATION_TOL).k;
        assert!(
            (numeric.k / baseline - 1.0).abs() < 0.01,
            "off-resonance K = {:.4} vs baseline {:.4}",
            numeric.k,
            baseline
        );
    }

    #[test]
    fn numeric_spectrum_ignores_arrival_delay() {
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.1 * sigma);
        let beta = beta_resonance(0);
        let still = cosine_state(spdc(sigma, sigma, pump, 0.0), beta);
        let delayed = cosine_state(spdc(sigma, sigma, pump, 50.0e-15), beta);
        let a = schmidt_numeric(&still).unwrap();
        let b = schmidt_numeric(&delayed).unwrap();
        assert_eq!(a.k, b.k);
        assert_eq!(a.eigenvalues, b.eigenvalues);
    }

    #[test]
    fn perturbative_diagonal_is_exact_without_delay() {
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.1 * sigma);
        let state = cosine_state(spdc(sigma, sigma, pump, 0.0), 0.0);
        let ladder = schmidt_standard(&spdc(sigma, sigma, pump, 0.0), DEFAULT_TRUNCATION_TOL);
        let spectrum = schmidt_perturbative(&state, ladder.truncation).unwrap();
        for (a, b) in spectrum.eigenvalues.iter().zip(&ladder.eigenvalues) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((spectrum.k / ladder.k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perturbative_deviation_is_reported_not_hidden() {
        // In the weakly entangled regime the diagonal estimate is known to
        // sit well off the numeric value; the spectrum must carry its raw
        // deficit instead of renormalizing the gap away.
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(sigma);
        let state = cosine_state(spdc(sigma, sigma, pump, 0.0), beta_resonance(0));
        let numeric = schmidt_numeric(&state).unwrap();
        let perturbative = schmidt_perturbative(&state, numeric.truncation).unwrap();
        assert!(perturbative.k >= 1.0);
        assert!(perturbative.trace_deficit >= 0.0);
        let sum: f64 = perturbative.eigenvalues.iter().sum();
        assert!((sum + perturbative.trace_deficit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heuristic_ladder_stays_normalized_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        let sigma1 = thz(10.0);
        for _ in 0..30 {
            let ratio: f64 = rng.gen_range(0.5..2.0);
            let pump_ratio = fm::exp(rng.gen_range(fm::ln(0.02)..fm::ln(3.0)));
            let params = spdc(sigma1, ratio * sigma1, PumpWidth::Finite(pump_ratio * sigma1), 0.0);
            let modes = mehler_params(&params);
            let scale = rng.gen_range(0.0..1.4) / modes.s1;
            let state = cosine_state(params, scale);
            let dim = truncation_dim(modes.z, DEFAULT_TRUNCATION_TOL);
            let spectrum = schmidt_heuristic(&state, dim).unwrap();
            let sum: f64 = spectrum.eigenvalues.iter().sum();
            assert!(
                (sum - 1.0).abs() < 1e-8,
                "ladder sum {sum:.12} for pump ratio {pump_ratio:.3}"
            );
            for lambda in &spectrum.eigenvalues {
                assert!(*lambda > 0.0 && *lambda <= 1.0);
            }
            assert!(spectrum.k >= 1.0 - 1e-9);

            let closed = approx_k_closed(&state).unwrap();
            assert!(
                (spectrum.k / closed - 1.0).abs() < 1e-8,
                "ladder K {:.10} vs closed form {closed:.10}",
                spectrum.k
            );
        }
    }

    #[test]
    fn closed_estimate_reduces_to_baseline_without_delay() {
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.1 * sigma);
        let state = cosine_state(spdc(sigma, sigma, pump, 0.0), 0.0);
        let params = mehler_params(&spdc(sigma, sigma, pump, 0.0));
        assert_eq!(approx_k_closed(&state).unwrap(), params.k_standard());
    }

    #[test]
    fn closed_estimate_tracks_numeric_solution_off_resonance() {
        let sigma = thz(10.0);
        let beta0 = beta_resonance(0);
        for pump_ratio in [1.0, 0.1] {
            let pump = PumpWidth::Finite(pump_ratio * sigma);
            for multiple in [0.5, 1.5] {
                let state = cosine_state(spdc(sigma, sigma, pump, 0.0), multiple * beta0);
                let closed = approx_k_closed(&state).unwrap();
                let numeric = schmidt_numeric(&state).unwrap().k;
                assert!(
                    (closed / numeric - 1.0).abs() < 0.10,
                    "pump {pump_ratio}σ, β = {multiple}β₀: closed {closed:.4} vs \
                     numeric {numeric:.4}"
                );
            }
        }
    }

    #[test]
    fn resonant_peak_heights_split_by_method() {
        // 4D-Gaussian-moment purity values for the dense solve, and the
        // designed 2K₀ peak of the resummed estimate; broad pumps damp the
        // dropped coherences, so there the estimate stays within a few
        // percent of the truth.
        let sigma = thz(10.0);
        let beta0 = beta_resonance(0);
        for (pump_ratio, truth) in [(0.1, 9.621038), (1.0, 1.449006)] {
            let pump = PumpWidth::Finite(pump_ratio * sigma);
            let state = cosine_state(spdc(sigma, sigma, pump, 0.0), beta0);
            let numeric = schmidt_numeric(&state).unwrap().k;
            assert!(
                (numeric / truth - 1.0).abs() < 1e-5,
                "pump {pump_ratio}σ: numeric K = {numeric:.6} vs {truth:.6}"
            );
            let closed = approx_k_closed(&state).unwrap();
            let baseline =
                schmidt_standard(&spdc(sigma, sigma, pump, 0.0), DEFAULT_TRUNCATION_TOL).k;
            if pump_ratio <= 0.1 {
                assert!((closed / (2.0 * baseline) - 1.0).abs() < 0.01);
            } else {
                assert!((closed / numeric - 1.0).abs() < 0.05);
            }
        }
    }

    #[test]
    fn narrow_pump_estimate_matches_closed_form() {
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.001 * sigma);
        let xi = fm::sqrt(0.5) * sigma;

        let resonant = cosine_state(spdc(sigma, sigma, pump, 0.0), beta_resonance(0));
        let (value, in_regime) = approx_k_small_sigma_p(&resonant).unwrap();
        assert!(in_regime);
        let doubled = 2.0 * xi / (0.001 * sigma);
        assert!((value / doubled - 1.0).abs() < 1e-6);

        for midpoint in [PI / OMEGA, 2.0 * PI / OMEGA] {
            let state = cosine_state(spdc(sigma, sigma, pump, 0.0), midpoint);
            let (simple, in_regime) = approx_k_small_sigma_p(&state).unwrap();
            assert!(in_regime);
            let closed = approx_k_closed(&state).unwrap();
            assert!(
                (simple / closed - 1.0).abs() < 0.01,
                "midpoint {midpoint:.3e}: simplified {simple:.4} vs closed {closed:.4}"
            );
        }

        let broad = cosine_state(spdc(sigma, sigma, PumpWidth::Finite(0.5 * sigma), 0.0), beta_resonance(0));
        let (_, in_regime) = approx_k_small_sigma_p(&broad).unwrap();
        assert!(!in_regime);
    }

    #[test]
    fn laguerre_generating_identities_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
        for _ in 0..10 {
            let t: f64 = rng.gen_range(0.05..0.9);
            let x: f64 = rng.gen_range(0.1..6.0);
            let y: f64 = rng.gen_range(0.1..6.0);

            let mut plain = 0.0;
            let mut bilinear = 0.0;
            let mut tm = 1.0;
            let terms = (fm::ln(1e-14 * (1.0 - t)) - 0.5 * (x + y)) / fm::ln(t);
            for m in 0..terms as u32 + 1 {
                let lx = assoc_laguerre(m, 0, x);
                plain += tm * lx;
                bilinear += tm * lx * assoc_laguerre(m, 0, y);
                tm *= t;
            }
            let plain_closed = fm::exp(-t * x / (1.0 - t)) / (1.0 - t);
            assert!(
                (plain / plain_closed - 1.0).abs() < 1e-10,
                "plain generating function at t = {t:.3}, x = {x:.3}"
            );
            let bilinear_closed = fm::exp(-(x + y) * t / (1.0 - t)) / (1.0 - t)
                * bessel_i0(2.0 * fm::sqrt(x * y * t) / (1.0 - t)).unwrap();
            assert!(
                (bilinear / bilinear_closed - 1.0).abs() < 1e-10,
                "product generating function at t = {t:.3}, x = {x:.3}, y = {y:.3}"
            );
        }
    }

    #[test]
    fn schmidt_maxima_sit_on_antibunching_minima() {
        use crate::symmetry::ds_closed_modulated;
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.1 * sigma);
        let beta0 = beta_resonance(0);
        let steps = 160usize;
        let mut k_values = Vec::with_capacity(steps + 1);
        let mut ds_values = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let beta = 4.0 * beta0 * i as f64 / steps as f64;
            let state = cosine_state(spdc(sigma, sigma, pump, 0.0), beta);
            k_values.push(schmidt_numeric(&state).unwrap().k);
            ds_values.push(ds_closed_modulated(&state).unwrap().d_s);
        }
        let maxima: Vec<usize> = (1..steps)
            .filter(|&i| k_values[i] > k_values[i - 1] && k_values[i] > k_values[i + 1])
            .collect();
        let minima: Vec<usize> = (1..steps)
            .filter(|&i| ds_values[i] < ds_values[i - 1] && ds_values[i] < ds_values[i + 1])
            .collect();
        assert_eq!(minima, vec![40, 120], "expected the two odd-order resonances");
        // K also carries gentle humps between the resonances, so the match
        // runs from each antibunching dip to a Schmidt peak, not the other
        // way around.
        for dip in &minima {
            assert!(
                maxima.iter().any(|peak| peak.abs_diff(*dip) <= 1),
                "no K peak within one step of the antibunching dip at {dip}: {maxima:?}"
            );
        }
    }

    #[test]
    fn modulation_and_pump_preconditions_are_enforced() {
        let sigma = thz(10.0);
        let pump = PumpWidth::Finite(0.1 * sigma);
        let sine = BiphotonState::new(
            spdc(sigma, sigma, pump, 0.0),
            ModulationSpec::sine(beta_resonance(0)).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            mehler_params_modulated(&sine),
            Err(SchmidtError::ModulationKindMismatch { .. })
        ));
        assert!(matches!(
            schmidt_numeric(&sine),
            Err(SchmidtError::ModulationKindMismatch { .. })
        ));
        assert!(matches!(
            approx_k_closed(&sine),
            Err(SchmidtError::ModulationKindMismatch { .. })
        ));

        let separable = cosine_state(
            spdc(sigma, sigma, PumpWidth::Infinite, 0.0),
            beta_resonance(0),
        );
        assert!(matches!(
            schmidt_numeric(&separable),
            Err(SchmidtError::PumpWidthMismatch { .. })
        ));
        assert!(matches!(
            approx_k_small_sigma_p(&separable),
            Err(SchmidtError::PumpWidthMismatch { .. })
        ));
        assert!(matches!(
            schmidt_heuristic(&separable, 8),
            Err(SchmidtError::PumpWidthMismatch { .. })
        ));

        let plain = cosine_state(spdc(sigma, sigma, pump, 0.0), beta_resonance(0));
        assert!(matches!(
            reduced_density_matrix(&plain, 0),
            Err(SchmidtError::DimensionTooSmall { dim: 0, .. })
        ));
        let message = format!("{}", SchmidtError::KOutOfRange { k: 0.5 });
        assert!(message.contains("0.5"));
    }
}
