//! Exchange-symmetry analysis of biphoton states.
//!
//! The central quantity is the symmetry degree
//! D_S = ∬ψ(ω₁,ω₂)ψ*(ω₂,ω₁)dω₁dω₂ ∈ [−1, 1], which fixes the
//! beamsplitter coincidence probability P₂c = (1−D_S)/2: symmetric states
//! (D_S=1) bunch, antisymmetric ones (D_S=−1) antibunch.
//!
//! Five independent routes are provided and cross-checked against each
//! other:
//! - [`ds_closed_spdc`]: closed form for unmodulated double-Gaussian
//!   states.
//! - [`ds_closed_modulated`]: closed form for cosine-modulated states.
//! - [`ds_parity_series`]: Gaussian-kernel expansion over oscillator
//!   modes, split into even- and odd-parity contributions D_S⁽⁺⁾ − D_S⁽⁻⁾.
//! - [`ds_quadrature`]: direct 2D quadrature of the exchange overlap, the
//!   oracle the closed forms are validated against.
//! - [`p2c_finite_gate`]: the 3D coincidence integral at a finite detector
//!   gate τ_f, which converges to (1−D_S)/2 as στ_f → ∞.

use crate::fm;
use crate::jsa::{BiphotonState, ModulationKind, PumpWidth, SpdcParams};
use crate::specfun::{make_quadrature, QuadratureKind, SpecFunError};

use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

/// Default per-axis order of the 2D quadrature oracle.
pub const DEFAULT_ORACLE_ORDER: usize = 200;

/// Positive root of q² + q = 1; the expansion parameter of the
/// Gaussian-kernel series. Its defining identity makes the kernel
/// resummation exact: 1 − q² = q and 1 − q = q².
pub const SERIES_Q: f64 = 0.618_033_988_749_894_9;

/// Hard cap on parity-series length. Reached only when σ_p/σ₁ drops well
/// below 10⁻³, where the term ratio approaches 1 like 1 − 4.24(σ_p/σ₁)².
const MAX_SERIES_TERMS: usize = 1 << 24;

/// |D_S| may exceed 1 by at most this much before clamping turns into an
/// error; separates quadrature roundoff from genuine defects.
const CLAMP_EXCESS: f64 = 1e-6;

/// Largest tolerated imaginary residue of the quadrature overlap.
const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-9;

/// Modulation-denominator floor; mirrors the state-normalization guard.
const DEGENERACY_FLOOR: f64 = 1e-12;

/// Errors from symmetry-degree evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryError {
    /// An estimator produced |D_S| > 1 beyond clamping tolerance.
    OutOfRange { d_s: f64 },
    /// The quadrature overlap kept an imaginary part above limit.
    ImaginaryResidue { residue: f64 },
    /// The operation requires a specific modulation kind.
    ModulationKindMismatch { required: &'static str },
    /// The operation requires a finite (or infinite) pump width.
    PumpWidthMismatch { required: &'static str },
    /// The modulation denominator vanished; no normalized state exists.
    DegenerateState { beta: f64 },
    /// The parity series failed to meet tolerance within the term cap.
    SeriesNoConvergence { terms: usize },
    /// Gate quadrature order too low for the requested στ_f product.
    GateUndersampled { order: usize, minimum: usize },
    /// Series tolerance must be a finite positive number.
    InvalidTolerance { tol: f64 },
    /// Quadrature-rule construction failed.
    Quadrature(SpecFunError),
}

impl fmt::Display for SymmetryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryError::OutOfRange { d_s } => {
                write!(f, "symmetry degree {d_s:e} outside [-1, 1] beyond clamping tolerance")
            }
            SymmetryError::ImaginaryResidue { residue } => {
                write!(f, "quadrature overlap kept imaginary residue {residue:e}; raise the order")
            }
            SymmetryError::ModulationKindMismatch { required } => {
                write!(f, "operation requires {required} modulation")
            }
            SymmetryError::PumpWidthMismatch { required } => {
                write!(f, "operation requires {required} pump width")
            }
            SymmetryError::DegenerateState { beta } => {
                write!(f, "modulation at beta = {beta:e} s annihilates the state")
            }
            SymmetryError::SeriesNoConvergence { terms } => {
                write!(f, "parity series did not meet tolerance within {terms} terms")
            }
            SymmetryError::GateUndersampled { order, minimum } => {
                write!(
                    f,
                    "gate quadrature order {order} undersamples the sinc kernel; need at least {minimum} or a shorter gate"
                )
            }
            SymmetryError::InvalidTolerance { tol } => {
                write!(f, "series tolerance must be finite and positive, got {tol:e}")
            }
            SymmetryError::Quadrature(e) => write!(f, "quadrature construction failed: {e}"),
        }
    }
}

impl core::error::Error for SymmetryError {}

impl From<SpecFunError> for SymmetryError {
    fn from(e: SpecFunError) -> Self {
        SymmetryError::Quadrature(e)
    }
}

/// Which route produced a [`SymmetryResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryMethod {
    ClosedSpdc,
    ClosedModulated,
    ParitySeries,
    Quadrature,
    FiniteGate,
}

impl SymmetryMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SymmetryMethod::ClosedSpdc => "closed_spdc",
            SymmetryMethod::ClosedModulated => "closed_modulated",
            SymmetryMethod::ParitySeries => "parity_series",
            SymmetryMethod::Quadrature => "quadrature",
            SymmetryMethod::FiniteGate => "finite_gate",
        }
    }
}

/// A symmetry-degree estimate together with the coincidence probability it
/// implies and, for the parity series, the even/odd decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryResult {
    pub d_s: f64,
    /// Coincidence probability (1 − d_s)/2, computed from the stored d_s.
    pub p_2c: f64,
    pub method: SymmetryMethod,
    /// Even-parity contribution D_S⁽⁺⁾ ≥ 0 (parity series only).
    pub d_s_plus: Option<f64>,
    /// Odd-parity contribution D_S⁽⁻⁾ ≥ 0 (parity series only).
    pub d_s_minus: Option<f64>,
    pub series_terms_used: Option<usize>,
}

impl SymmetryResult {
    fn from_estimate(d_s: f64, method: SymmetryMethod) -> Result<Self, SymmetryError> {
        let d_s = clamp_symmetry_degree(d_s)?;
        Ok(SymmetryResult {
            d_s,
            p_2c: 0.5 * (1.0 - d_s),
            method,
            d_s_plus: None,
            d_s_minus: None,
            series_terms_used: None,
        })
    }
}

fn clamp_symmetry_degree(d_s: f64) -> Result<f64, SymmetryError> {
    if !d_s.is_finite() || fm::abs(d_s) > 1.0 + CLAMP_EXCESS {
        return Err(SymmetryError::OutOfRange { d_s });
    }
    Ok(d_s.clamp(-1.0, 1.0))
}

/// The arrival-time delay |Δτ| at which the unmodulated symmetry degree
/// falls to half its Δτ=0 value: √(ln 2)·√(σ₁²+σ₂²)/(σ₁σ₂). The half width
/// of the coalescence dip in standard two-photon interferometry.
pub fn hom_dip_half_width(spdc: &SpdcParams) -> f64 {
    fm::sqrt(core::f64::consts::LN_2 / spdc.xi_sq())
}

/// Width-dependent prefactor of the unmodulated closed form:
/// 2σ₁σ₂√(σ₁²+σ₂²+σ_p²)/(√(σ₁²+σ₂²)·√(σ_p²(σ₁²+σ₂²)+4σ₁²σ₂²)),
/// equal to 1 when σ₁ = σ₂ for every pump width.
fn closed_spdc_sigma_factor(p: &SpdcParams) -> f64 {
    let s1 = p.sigma1() * p.sigma1();
    let s2 = p.sigma2() * p.sigma2();
    match p.sigma_p() {
        PumpWidth::Finite(sp) => {
            let p2 = sp * sp;
            2.0 * p.sigma1() * p.sigma2() * fm::sqrt(s1 + s2 + p2)
                / (fm::sqrt(s1 + s2) * fm::sqrt(p2 * (s1 + s2) + 4.0 * s1 * s2))
        }
        PumpWidth::Infinite => 2.0 * p.sigma1() * p.sigma2() / (s1 + s2),
    }
}

/// Closed-form symmetry degree of the unmodulated state; always in (0, 1].
/// Independent of σ_p when σ₁ = σ₂, and invariant under σ₁ ↔ σ₂.
pub fn ds_closed_spdc(spdc: &SpdcParams) -> SymmetryResult {
    let dt = spdc.delta_tau();
    let d_s = (closed_spdc_sigma_factor(spdc) * fm::exp(-(spdc.xi_sq() * dt * dt))).min(1.0);
    SymmetryResult {
        d_s,
        p_2c: 0.5 * (1.0 - d_s),
        method: SymmetryMethod::ClosedSpdc,
        d_s_plus: None,
        d_s_minus: None,
        series_terms_used: None,
    }
}

/// Closed-form symmetry degree of the cosine-modulated state.
///
/// The cosh(2βΔτξ²) term of the textbook expression is recombined with the
/// Gaussian prefactors into e^{−ξ²(Δτ∓β)²} halves, which cannot overflow
/// and reduce bitwise to [`ds_closed_spdc`] at β = 0.
pub fn ds_closed_modulated(state: &BiphotonState) -> Result<SymmetryResult, SymmetryError> {
    if state.modulation().kind() != ModulationKind::Cosine {
        return Err(SymmetryError::ModulationKindMismatch { required: "cosine" });
    }
    let p = state.spdc();
    let beta = state.modulation().beta();
    let xi2 = p.xi_sq();
    let dt = p.delta_tau();
    let gamma_sp2 = match p.sigma_p() {
        PumpWidth::Finite(sp) => p.gamma_sq() * sp * sp,
        PumpWidth::Infinite => xi2,
    };
    let cos2bo = fm::cos(2.0 * beta * p.omega());
    let term_osc = fm::exp(-(xi2 * dt * dt) - beta * beta * gamma_sp2) * cos2bo;
    let dm = dt - beta;
    let dp = dt + beta;
    let term_env = 0.5 * (fm::exp(-(xi2 * dm * dm)) + fm::exp(-(xi2 * dp * dp)));
    let denom = 1.0 + fm::exp(-(beta * beta * p.alpha_sq())) * cos2bo;
    if denom < DEGENERACY_FLOOR {
        return Err(SymmetryError::DegenerateState { beta });
    }
    let d_s = closed_spdc_sigma_factor(p) * (term_osc + term_env) / denom;
    SymmetryResult::from_estimate(d_s, SymmetryMethod::ClosedModulated)
}

/// Resonance-limit approximation for cosine modulation at Δτ = 0 and
/// σ_p ≪ σ₁: 1 + 2β²ξ²cos(2βΩ)/(1 + cos(2βΩ) − β²ξ²cos(2βΩ)).
///
/// Evaluated at the given β (the state supplies Ω and ξ² only), so a single
/// state can serve a whole resonance scan. Returns the value and whether
/// β²ξ² ≤ 0.1 keeps the expansion in its regime. Exactly −1 at the
/// resonances β = π(2n+1)/(2Ω).
pub fn ds_small_beta_approx(
    state: &BiphotonState,
    beta: f64,
) -> Result<(f64, bool), SymmetryError> {
    if state.modulation().kind() != ModulationKind::Cosine {
        return Err(SymmetryError::ModulationKindMismatch { required: "cosine" });
    }
    let p = state.spdc();
    let b2xi2 = beta * beta * p.xi_sq();
    let cos2bo = fm::cos(2.0 * beta * p.omega());
    let value = 1.0 + 2.0 * b2xi2 * cos2bo / (1.0 + cos2bo - b2xi2 * cos2bo);
    Ok((value, b2xi2 <= 0.1))
}

/// Symmetry degree in the separable limit σ_p → ∞:
/// D_S = N²·|∫φ₁₂(ω̃)dω̃|², structurally non-negative.
pub fn ds_separable_limit(state: &BiphotonState) -> Result<f64, SymmetryError> {
    if !state.spdc().sigma_p().is_infinite() {
        return Err(SymmetryError::PumpWidthMismatch { required: "infinite" });
    }
    let rule = make_quadrature(QuadratureKind::GaussHermite, DEFAULT_ORACLE_ORDER)?;
    let scale = 1.0 / fm::sqrt(state.spdc().phi12_decay());
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        acc += w * state.phi12(scale * x);
    }
    let integral = acc * scale;
    clamp_symmetry_degree(state.norm_sq() * integral.norm_sqr())
}

/// Symmetry degree by direct 2D quadrature at the default oracle order.
pub fn ds_quadrature(state: &BiphotonState) -> Result<SymmetryResult, SymmetryError> {
    ds_quadrature_with_order(state, DEFAULT_ORACLE_ORDER)
}

/// Symmetry degree by tensor Gauss-Hermite quadrature over the rotated
/// coordinates u = (ω̃₁+ω̃₂)/√2, v = (ω̃₁−ω̃₂)/√2, in which the Gaussian
/// envelope of the product-form overlap is axis-aligned at every pump
/// width. The imaginary residue of the overlap is checked and discarded.
pub fn ds_quadrature_with_order(
    state: &BiphotonState,
    order: usize,
) -> Result<SymmetryResult, SymmetryError> {
    let p = state.spdc();
    let c = p.phi12_decay();
    let pump_inv_sq = match p.sigma_p() {
        PumpWidth::Finite(sp) => 1.0 / (sp * sp),
        PumpWidth::Infinite => 0.0,
    };
    let a_u = 1.0 / fm::sqrt(c + 2.0 * pump_inv_sq);
    let a_v = 1.0 / fm::sqrt(c);
    let rule = make_quadrature(QuadratureKind::GaussHermite, order)?;
    let nodes = rule.nodes();
    let weights = rule.weights();
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&xu, &wu) in nodes.iter().zip(weights) {
        let u = a_u * xu;
        let kernel = fm::exp(-2.0 * u * u * pump_inv_sq);
        let mut row = Complex64::new(0.0, 0.0);
        for (&xv, &wv) in nodes.iter().zip(weights) {
            let v = a_v * xv;
            let w1 = (u + v) * inv_sqrt2;
            let w2 = (u - v) * inv_sqrt2;
            row += wv * state.phi12(w1) * state.phi12(w2).conj();
        }
        acc += wu * kernel * row;
    }
    let overlap = acc * a_u * a_v * state.norm_sq();
    if fm::abs(overlap.im) > IMAGINARY_RESIDUE_LIMIT {
        return Err(SymmetryError::ImaginaryResidue { residue: overlap.im });
    }
    SymmetryResult::from_estimate(overlap.re, SymmetryMethod::Quadrature)
}

/// Symmetry degree of an arbitrary two-photon amplitude by direct
/// quadrature on an axis-aligned grid of the given per-axis scales around
/// `center`, normalizing internally:
/// D_S = ∬ψ(ω₁,ω₂)ψ*(ω₂,ω₁) / ∬|ψ|².
///
/// The grid is not adapted to frequency correlations, so this variant is
/// an oracle for amplitudes whose envelope the scales actually cover —
/// including amplitudes outside the product form, such as antisymmetric
/// test states (which must yield exactly −1).
pub fn ds_quadrature_general<F>(
    psi: F,
    center: f64,
    scale1: f64,
    scale2: f64,
    order: usize,
) -> Result<SymmetryResult, SymmetryError>
where
    F: Fn(f64, f64) -> Complex64,
{
    let rule = make_quadrature(QuadratureKind::GaussHermite, order)?;
    let nodes = rule.nodes();
    let weights = rule.weights();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0f64;
    for (&x1, &w1) in nodes.iter().zip(weights) {
        let omega1 = center + scale1 * x1;
        for (&x2, &w2) in nodes.iter().zip(weights) {
            let omega2 = center + scale2 * x2;
            let fwd = psi(omega1, omega2);
            let swapped = psi(omega2, omega1);
            let w = w1 * w2;
            num += w * fwd * swapped.conj();
            den += w * fwd.norm_sqr();
        }
    }
    let overlap = num / den;
    if fm::abs(overlap.im) > IMAGINARY_RESIDUE_LIMIT {
        return Err(SymmetryError::ImaginaryResidue { residue: overlap.im });
    }
    SymmetryResult::from_estimate(overlap.re, SymmetryMethod::Quadrature)
}

/// One plane-wave component a·e^{iμω̃} of the modulated spectral function,
/// in σ₁-scaled frequency units.
struct SeriesComponent {
    amp: Complex64,
    mu: f64,
}

fn series_components(state: &BiphotonState) -> ([SeriesComponent; 2], usize) {
    let p = state.spdc();
    let s1 = p.sigma1();
    let dt = p.delta_tau() * s1;
    let beta_omega = state.modulation().beta() * p.omega();
    let beta = state.modulation().beta() * s1;
    let idle = SeriesComponent { amp: Complex64::new(0.0, 0.0), mu: 0.0 };
    match state.modulation().kind() {
        ModulationKind::None => {
            ([SeriesComponent { amp: Complex64::new(1.0, 0.0), mu: -dt }, idle], 1)
        }
        ModulationKind::Cosine => (
            [
                SeriesComponent { amp: Complex64::from_polar(0.5, beta_omega), mu: beta - dt },
                SeriesComponent { amp: Complex64::from_polar(0.5, -beta_omega), mu: -beta - dt },
            ],
            2,
        ),
        ModulationKind::Sine => (
            [
                SeriesComponent {
                    amp: Complex64::from_polar(0.5, beta_omega - core::f64::consts::FRAC_PI_2),
                    mu: beta - dt,
                },
                SeriesComponent {
                    amp: Complex64::from_polar(0.5, core::f64::consts::FRAC_PI_2 - beta_omega),
                    mu: -beta - dt,
                },
            ],
            2,
        ),
    }
}

/// Symmetry degree by the Gaussian-kernel parity series.
///
/// The pump kernel e^{−(ω̃₁+ω̃₂)²/σ_p²} is expanded over oscillator modes
/// with ratio −q; mode n contributes |f_n|²·qⁿ/(2ⁿn!) to D_S⁽⁺⁾ for even n
/// and to D_S⁽⁻⁾ for odd n, where f_n is the overlap of φ₁₂ with the n-th
/// Hermite function of the kernel. For the Gaussian-times-plane-wave
/// components of φ₁₂ every f_n is available in closed form through a
/// scaled three-term recurrence, so no coefficient quadrature is involved
/// and the series length is limited only by the term cap.
///
/// `tol` is the absolute tail bound on D_S at which summation stops.
pub fn ds_parity_series(
    state: &BiphotonState,
    tol: f64,
) -> Result<SymmetryResult, SymmetryError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SymmetryError::InvalidTolerance { tol });
    }
    let p = state.spdc();
    let sp = match p.sigma_p() {
        PumpWidth::Finite(v) => v,
        PumpWidth::Infinite => {
            return Err(SymmetryError::PumpWidthMismatch { required: "finite" })
        }
    };
    let s1 = p.sigma1();
    let sp_hat = sp / s1;
    let c_hat = p.phi12_decay() * s1 * s1;
    let q = SERIES_Q;

    let cap_gamma = c_hat + q * q / (sp_hat * sp_hat);
    let a_coef = 1.0 - 1.0 / (sp_hat * sp_hat * cap_gamma);
    let rho = q * fm::abs(a_coef);
    let scale = state.norm_sq() * s1 * s1 * fm::sqrt(q);

    let (comps, n_comps) = series_components(state);
    let comps = &comps[..n_comps];

    struct Channel {
        pref: Complex64,
        u1: Complex64,
        h_prev: Complex64,
        h_cur: Complex64,
    }
    let mut channels: Vec<Channel> = Vec::with_capacity(n_comps);
    let mut u1_max = 0.0f64;
    for comp in comps {
        let pref = comp.amp
            * fm::sqrt(core::f64::consts::PI / cap_gamma)
            * fm::exp(-comp.mu * comp.mu / (4.0 * cap_gamma));
        let b = Complex64::new(0.0, comp.mu / (sp_hat * cap_gamma));
        let u1 = b * fm::sqrt(q / 2.0);
        u1_max = u1_max.max(u1.norm());
        channels.push(Channel {
            pref,
            u1,
            h_prev: Complex64::new(0.0, 0.0),
            h_cur: Complex64::new(1.0, 0.0),
        });
    }

    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    let mut t_prev = 0.0f64;
    let mut terms_used = 0usize;
    let mut converged = false;

    for n in 0..MAX_SERIES_TERMS {
        if n > 0 {
            // Advance h_{n-1} -> h_n through
            // h_n = u1·h_{n-1}/√n − qA·√((n−1)/n)·h_{n-2}.
            let nf = n as f64;
            let drop = q * a_coef * fm::sqrt((nf - 1.0) / nf);
            let lift = 1.0 / fm::sqrt(nf);
            for ch in channels.iter_mut() {
                let next = ch.u1 * ch.h_cur * lift - drop * ch.h_prev;
                ch.h_prev = ch.h_cur;
                ch.h_cur = next;
            }
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for ch in channels.iter() {
            sum += ch.pref * ch.h_cur;
        }
        let t = sum.norm_sqr();
        if n % 2 == 0 {
            plus += t;
        } else {
            minus += t;
        }
        terms_used = n + 1;

        if n >= 16 {
            let r = rho + u1_max / fm::sqrt((n + 1) as f64);
            if r < 1.0 {
                let bound = 4.0 * t.max(t_prev) * r * r / (1.0 - r * r);
                if scale * bound < tol {
                    converged = true;
                    break;
                }
            }
        }
        t_prev = t;
    }
    if !converged {
        return Err(SymmetryError::SeriesNoConvergence { terms: terms_used });
    }

    let d_s_plus = scale * plus;
    let d_s_minus = scale * minus;
    let d_s = clamp_symmetry_degree(d_s_plus - d_s_minus)?;
    Ok(SymmetryResult {
        d_s,
        p_2c: 0.5 * (1.0 - d_s),
        method: SymmetryMethod::ParitySeries,
        d_s_plus: Some(d_s_plus),
        d_s_minus: Some(d_s_minus),
        series_terms_used: Some(terms_used),
    })
}

/// Coincidence probability at a finite detector gate τ_f, by direct 3D
/// Gauss-Legendre quadrature of
/// P₂c = (2π)⁻¹∭ψ(ω₁,ω₂)ψ*(ω₁+ω₂−ω₂′,ω₂′)
///        ·[sin((ω₂−ω₂′)τ_f)/(ω₂−ω₂′) − sin((ω₁−ω₂′)τ_f)/(ω₁−ω₂′)]d³ω
/// over the cube ±6·max(σ₁,σ₂) in each detuning. As στ_f grows the sinc
/// kernels sharpen into delta functions and the value converges to
/// (1−D_S)/2.
pub fn p2c_finite_gate(
    state: &BiphotonState,
    tau_f: f64,
    order: usize,
) -> Result<f64, SymmetryError> {
    let p = state.spdc();
    if p.sigma_p().is_infinite() {
        return Err(SymmetryError::PumpWidthMismatch { required: "finite" });
    }
    let lambda = p.sigma1().max(p.sigma2());
    let sigma_tau = lambda * tau_f;
    let minimum = (4.0 * sigma_tau) as usize + 1;
    if order < minimum {
        return Err(SymmetryError::GateUndersampled { order, minimum });
    }
    let rule = make_quadrature(QuadratureKind::GaussLegendre, order)?;
    let half = 6.0 * lambda;
    let n = rule.order();
    let nodes: Vec<f64> = rule.nodes().iter().map(|&t| half * t).collect();
    let weights: Vec<f64> = rule.weights().iter().map(|&w| half * w).collect();

    let s1_sq = p.sigma1() * p.sigma1();
    let s2_sq = p.sigma2() * p.sigma2();
    let pump_inv_sq = match p.sigma_p() {
        PumpWidth::Finite(sp) => 1.0 / (sp * sp),
        PumpWidth::Infinite => unreachable!(),
    };
    let dt = p.delta_tau();
    let omega = p.omega();
    let modulation = *state.modulation();

    let sinc_gate = |d: f64| -> f64 {
        let x = d * tau_f;
        if fm::abs(x) < 1e-4 {
            tau_f * (1.0 - x * x / 6.0)
        } else {
            fm::sin(x) / d
        }
    };

    // Pairwise tables over the shared node set: gate kernel and the
    // arrival-phase cosine.
    let mut gate_tab = Vec::with_capacity(n * n);
    let mut phase_tab = Vec::with_capacity(n * n);
    for &a in &nodes {
        for &b in &nodes {
            gate_tab.push(sinc_gate(a - b));
            phase_tab.push(fm::cos(dt * (a - b)));
        }
    }
    // Per-axis envelope factors, weights folded in.
    let g1m: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * fm::exp(-0.5 * x * x / s1_sq) * modulation.factor(omega + x))
        .collect();
    let g2: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&y, &w)| w * fm::exp(-0.5 * y * y / s2_sq))
        .collect();
    let g2_unweighted: Vec<f64> =
        nodes.iter().map(|&z| fm::exp(-0.5 * z * z / s2_sq)).collect();

    let mut total = 0.0f64;
    for i in 0..n {
        let x = nodes[i];
        let gate_i = &gate_tab[i * n..(i + 1) * n];
        for j in 0..n {
            let y = nodes[j];
            let s0 = x + y;
            let pump = fm::exp(-s0 * s0 * pump_inv_sq);
            if pump < 1e-300 {
                continue;
            }
            let gate_j = &gate_tab[j * n..(j + 1) * n];
            let phase_j = &phase_tab[j * n..(j + 1) * n];
            let mut inner = 0.0f64;
            for k in 0..n {
                let z = nodes[k];
                let s = s0 - z;
                let swapped_arm =
                    fm::exp(-0.5 * s * s / s1_sq) * modulation.factor(omega + s);
                inner += weights[k]
                    * g2_unweighted[k]
                    * swapped_arm
                    * phase_j[k]
                    * (gate_j[k] - gate_i[k]);
            }
            total += g1m[i] * g2[j] * pump * inner;
        }
    }
    Ok(state.norm_sq() * total / (2.0 * core::f64::consts::PI))
}
