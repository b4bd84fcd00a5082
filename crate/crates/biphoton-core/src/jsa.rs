//! Joint spectral amplitudes of SPDC photon pairs with optional harmonic
//! spectral modulation.
//!
//! The model is the double-Gaussian SPDC amplitude with carrier Ω, signal
//! and idler widths σ₁, σ₂, a pump envelope of width σ_p (finite or the
//! symbolic separable limit), arrival-time phases τ₁, τ₂, and a multiplier
//! m(ω₁) ∈ {1, cos(βω₁), sin(βω₁)} applied to the modulated arm:
//!
//! ψ(ω₁, ω₂) = N·exp{−(ω₁−Ω)²/2σ₁² − (ω₂−Ω)²/2σ₂²}·e^{i(ω₁τ₁+ω₂τ₂)}·m(ω₁)
//!             ·exp{−(ω₁+ω₂−2Ω)²/2σ_p²}.
//!
//! [`BiphotonState::new`] computes and caches the squared normalization N²
//! (closed form for the unmodulated and cosine states; quadrature for sine,
//! whose closed form the harmonic analysis downstream never needs).

use crate::fm;
use crate::specfun::{make_quadrature, QuadratureKind, SpecFunError};
use crate::units::SPEED_OF_LIGHT_M_PER_S;

use core::fmt;
use num_complex::Complex64;

/// Order of the reference rule used for normalization quadrature and checks.
pub const REFERENCE_QUAD_ORDER: usize = 200;

/// Denominator floor below which a modulated state is considered destroyed
/// (the harmonic factor annihilates the whole amplitude and N² diverges).
const DEGENERACY_FLOOR: f64 = 1e-12;

/// Errors from parameter validation and state normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum JsaError {
    /// A width or carrier that must be strictly positive is not.
    NonPositiveParameter { name: &'static str, value: f64 },
    /// A parameter is NaN or infinite where a finite value is required.
    NonFiniteParameter { name: &'static str, value: f64 },
    /// Modulation delay β must be ≥ 0.
    NegativeBeta { beta: f64 },
    /// The harmonic factor extinguishes the state at this β; the norm
    /// diverges and no normalized state exists.
    DegenerateModulation { beta: f64 },
    /// Quadrature-rule construction failed (normalization fallback path).
    Quadrature(SpecFunError),
}

impl fmt::Display for JsaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JsaError::NonPositiveParameter { name, value } => {
                write!(f, "parameter {name} must be strictly positive, got {value:e}")
            }
            JsaError::NonFiniteParameter { name, value } => {
                write!(f, "parameter {name} must be finite, got {value:e}")
            }
            JsaError::NegativeBeta { beta } => {
                write!(f, "modulation delay beta must be >= 0, got {beta:e}")
            }
            JsaError::DegenerateModulation { beta } => {
                write!(
                    f,
                    "modulation at beta = {beta:e} s annihilates the state; normalization diverges"
                )
            }
            JsaError::Quadrature(e) => write!(f, "normalization quadrature failed: {e}"),
        }
    }
}

impl core::error::Error for JsaError {}

impl From<SpecFunError> for JsaError {
    fn from(e: SpecFunError) -> Self {
        JsaError::Quadrature(e)
    }
}

/// Pump envelope width: finite σ_p, or the exact separable limit σ_p → ∞
/// in which the pump factor is identically 1.
///
/// The limit is a symbolic branch, not a large float, so separable-state
/// formulas hold exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpWidth {
    Finite(f64),
    Infinite,
}

impl PumpWidth {
    pub fn is_infinite(self) -> bool {
        matches!(self, PumpWidth::Infinite)
    }

    /// The finite width, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            PumpWidth::Finite(v) => Some(v),
            PumpWidth::Infinite => None,
        }
    }
}

/// SPDC source parameters. Frequencies are angular (rad/s), times seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcParams {
    sigma1: f64,
    sigma2: f64,
    sigma_p: PumpWidth,
    omega: f64,
    tau1: f64,
    tau2: f64,
}

impl SpdcParams {
    /// Validates and stores source parameters: σ₁, σ₂, Ω strictly positive,
    /// σ_p strictly positive when finite, τ₁, τ₂ finite.
    pub fn new(
        sigma1: f64,
        sigma2: f64,
        sigma_p: PumpWidth,
        omega: f64,
        tau1: f64,
        tau2: f64,
    ) -> Result<Self, JsaError> {
        for (name, value) in [("sigma1", sigma1), ("sigma2", sigma2), ("omega", omega)] {
            if !value.is_finite() {
                return Err(JsaError::NonFiniteParameter { name, value });
            }
            if value <= 0.0 {
                return Err(JsaError::NonPositiveParameter { name, value });
            }
        }
        if let PumpWidth::Finite(v) = sigma_p {
            if !v.is_finite() {
                return Err(JsaError::NonFiniteParameter { name: "sigma_p", value: v });
            }
            if v <= 0.0 {
                return Err(JsaError::NonPositiveParameter { name: "sigma_p", value: v });
            }
        }
        for (name, value) in [("tau1", tau1), ("tau2", tau2)] {
            if !value.is_finite() {
                return Err(JsaError::NonFiniteParameter { name, value });
            }
        }
        Ok(SpdcParams { sigma1, sigma2, sigma_p, omega, tau1, tau2 })
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma_p(&self) -> PumpWidth {
        self.sigma_p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    /// Relative arrival delay Δτ = τ₂ − τ₁.
    pub fn delta_tau(&self) -> f64 {
        self.tau2 - self.tau1
    }

    /// True when the pump width violates the narrow-band regime the
    /// detection formalism assumes (σ_p > 0.1·Ω). Results are still
    /// computed; the flag is advisory.
    pub fn narrowband_warning(&self) -> bool {
        match self.sigma_p {
            PumpWidth::Finite(v) => v > 0.1 * self.omega,
            PumpWidth::Infinite => false,
        }
    }

    /// Effective squared width of the modulated-arm marginal:
    /// α² = σ₁²(σ₂²+σ_p²)/(σ₁²+σ₂²+σ_p²), reducing to σ₁² as σ_p → ∞.
    pub fn alpha_sq(&self) -> f64 {
        let s1 = self.sigma1 * self.sigma1;
        let s2 = self.sigma2 * self.sigma2;
        match self.sigma_p {
            PumpWidth::Finite(p) => {
                let p2 = p * p;
                s1 * (s2 + p2) / (s1 + s2 + p2)
            }
            PumpWidth::Infinite => s1,
        }
    }

    /// Squared reduced width ξ² = σ₁²σ₂²/(σ₁²+σ₂²).
    pub fn xi_sq(&self) -> f64 {
        let s1 = self.sigma1 * self.sigma1;
        let s2 = self.sigma2 * self.sigma2;
        s1 * s2 / (s1 + s2)
    }

    /// Squared pump-referred width γ² = σ₁²σ₂²/[(σ₁²+σ₂²)σ_p² + 4σ₁²σ₂²],
    /// vanishing as σ_p → ∞.
    pub fn gamma_sq(&self) -> f64 {
        let s1 = self.sigma1 * self.sigma1;
        let s2 = self.sigma2 * self.sigma2;
        match self.sigma_p {
            PumpWidth::Finite(p) => s1 * s2 / ((s1 + s2) * p * p + 4.0 * s1 * s2),
            PumpWidth::Infinite => 0.0,
        }
    }

    /// Gaussian decay coefficient of the spectral function φ₁₂:
    /// c = (1/σ₁² + 1/σ₂²)/2, so |φ₁₂(ω̃)| = e^{−cω̃²}·|m(Ω+ω̃)|.
    pub fn phi12_decay(&self) -> f64 {
        0.5 * (1.0 / (self.sigma1 * self.sigma1) + 1.0 / (self.sigma2 * self.sigma2))
    }
}

/// Which harmonic factor multiplies the modulated arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulationKind {
    None,
    Cosine,
    Sine,
}

/// Harmonic modulation m(ω) of the first arm: 1, cos(βω), or sin(βω),
/// with β the interferometer delay parameter (β = ΔL/2c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec {
    kind: ModulationKind,
    beta: f64,
}

impl ModulationSpec {
    /// No modulation; β is fixed at 0 and ignored.
    pub fn none() -> Self {
        ModulationSpec { kind: ModulationKind::None, beta: 0.0 }
    }

    /// cos(βω) modulation with delay β in seconds (β ≥ 0).
    pub fn cosine(beta: f64) -> Result<Self, JsaError> {
        Self::harmonic(ModulationKind::Cosine, beta)
    }

    /// sin(βω) modulation with delay β in seconds (β ≥ 0).
    pub fn sine(beta: f64) -> Result<Self, JsaError> {
        Self::harmonic(ModulationKind::Sine, beta)
    }

    fn harmonic(kind: ModulationKind, beta: f64) -> Result<Self, JsaError> {
        if !beta.is_finite() {
            return Err(JsaError::NonFiniteParameter { name: "beta", value: beta });
        }
        if beta < 0.0 {
            return Err(JsaError::NegativeBeta { beta });
        }
        if kind == ModulationKind::None {
            return Ok(Self::none());
        }
        Ok(ModulationSpec { kind, beta })
    }

    pub fn kind(&self) -> ModulationKind {
        self.kind
    }

    /// Delay parameter β in seconds (0 for kind = none).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The equivalent interferometer path-length difference ΔL = 2cβ in
    /// meters.
    pub fn path_difference(&self) -> f64 {
        2.0 * SPEED_OF_LIGHT_M_PER_S * self.beta
    }

    /// The modulation factor m(ω) at angular frequency ω.
    pub fn factor(&self, omega: f64) -> f64 {
        match self.kind {
            ModulationKind::None => 1.0,
            ModulationKind::Cosine => fm::cos(self.beta * omega),
            ModulationKind::Sine => fm::sin(self.beta * omega),
        }
    }
}

/// Output-port descriptions of a Mach-Zehnder interferometer with arm
/// lengths L₁, L₂ acting on the first photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziPorts {
    /// Delay parameter β = (L₂−L₁)/(2c) shared by both output ports.
    pub beta: f64,
    /// First output port: cos(βω) spectral factor.
    pub port1: ModulationSpec,
    /// Second (dark) output port: sin(βω) spectral factor.
    pub port3: ModulationSpec,
    /// Delay L_S/(2c) of the common phase factor e^{iωL_S/2c},
    /// L_S = L₁+L₂. Recorded for completeness; as a local unitary it drops
    /// out of |ψ|², D_S, and every Schmidt quantity, so it is never
    /// multiplied into the amplitude.
    pub common_phase_delay: f64,
}

/// Maps interferometer arm lengths (meters, ≥ 0) to the spectral factors at
/// the two output ports: cos(βω) on port 1, sin(βω) on port 3, β = ΔL/(2c).
pub fn mzi_transform_description(l1: f64, l2: f64) -> Result<MziPorts, JsaError> {
    for (name, value) in [("L1", l1), ("L2", l2)] {
        if !value.is_finite() {
            return Err(JsaError::NonFiniteParameter { name, value });
        }
        if value < 0.0 {
            return Err(JsaError::NonPositiveParameter { name, value });
        }
    }
    let beta = fm::abs(l2 - l1) / (2.0 * SPEED_OF_LIGHT_M_PER_S);
    Ok(MziPorts {
        beta,
        port1: ModulationSpec::cosine(beta)?,
        port3: ModulationSpec::sine(beta)?,
        common_phase_delay: (l1 + l2) / (2.0 * SPEED_OF_LIGHT_M_PER_S),
    })
}

/// A normalized biphoton state: SPDC parameters, modulation, and the cached
/// squared normalization constant N².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiphotonState {
    spdc: SpdcParams,
    modulation: ModulationSpec,
    norm_sq: f64,
}

impl BiphotonState {
    /// Normalizes the state: N² in closed form for the unmodulated and
    /// cosine states, by reference quadrature for sine. Fails when the
    /// modulation extinguishes the amplitude (N² would diverge).
    pub fn new(spdc: SpdcParams, modulation: ModulationSpec) -> Result<Self, JsaError> {
        let base = base_norm_sq(&spdc);
        let norm_sq = match modulation.kind {
            ModulationKind::None => base,
            ModulationKind::Cosine | ModulationKind::Sine => {
                let beta = modulation.beta;
                let envelope = fm::exp(-beta * beta * spdc.alpha_sq());
                let carrier = fm::cos(2.0 * beta * spdc.omega) * envelope;
                let denom = match modulation.kind {
                    ModulationKind::Cosine => 1.0 + carrier,
                    _ => 1.0 - carrier,
                };
                if denom < DEGENERACY_FLOOR {
                    return Err(JsaError::DegenerateModulation { beta });
                }
                match modulation.kind {
                    ModulationKind::Cosine => 2.0 * base / denom,
                    _ => {
                        // The closed cosine route follows from a Gaussian
                        // marginal identity; the sine state is normalized
                        // directly against quadrature instead.
                        let raw = raw_norm_integral(&spdc, &modulation)?;
                        1.0 / raw
                    }
                }
            }
        };
        Ok(BiphotonState { spdc, modulation, norm_sq })
    }

    pub fn spdc(&self) -> &SpdcParams {
        &self.spdc
    }

    pub fn modulation(&self) -> &ModulationSpec {
        &self.modulation
    }

    /// Cached squared normalization constant N².
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// The joint spectral amplitude ψ(ω₁, ω₂).
    pub fn evaluate(&self, omega1: f64, omega2: f64) -> Complex64 {
        let p = &self.spdc;
        let w1 = omega1 - p.omega;
        let w2 = omega2 - p.omega;
        let mut expo = -0.5 * w1 * w1 / (p.sigma1 * p.sigma1)
            - 0.5 * w2 * w2 / (p.sigma2 * p.sigma2);
        if let PumpWidth::Finite(sp) = p.sigma_p {
            let s = w1 + w2;
            expo -= 0.5 * s * s / (sp * sp);
        }
        let mag = fm::sqrt(self.norm_sq) * fm::exp(expo) * self.modulation.factor(omega1);
        let phase = omega1 * p.tau1 + omega2 * p.tau2;
        Complex64::from_polar(mag, phase)
    }

    /// The spectral function φ₁₂(ω̃) = φ₁(Ω+ω̃)·conj(φ₂(Ω+ω̃)) of the
    /// product form, excluding the normalization constant:
    /// e^{−cω̃²}·m(Ω+ω̃)·e^{−i(Ω+ω̃)Δτ} with c = (1/σ₁²+1/σ₂²)/2.
    pub fn phi12(&self, omega_tilde: f64) -> Complex64 {
        let p = &self.spdc;
        let c = p.phi12_decay();
        let mag = fm::exp(-c * omega_tilde * omega_tilde)
            * self.modulation.factor(p.omega + omega_tilde);
        let phase = -(p.omega + omega_tilde) * p.delta_tau();
        Complex64::from_polar(mag, phase)
    }

    /// Even/odd decomposition φ₁₂^(±)(ω̃) = [φ₁₂(ω̃) ± φ₁₂(−ω̃)]/2.
    /// The two parts reconstruct φ₁₂ exactly; the odd part alone drives
    /// antibunching.
    pub fn phi12_parity_split(&self, omega_tilde: f64) -> (Complex64, Complex64) {
        let fwd = self.phi12(omega_tilde);
        let bwd = self.phi12(-omega_tilde);
        (0.5 * (fwd + bwd), 0.5 * (fwd - bwd))
    }

    /// ∬|ψ|² by the reference rule (tensor Gauss-Hermite of order 200 along
    /// the state's principal axes). Equals 1 within 1e−8 for every state
    /// this module constructs; exposed so callers can audit a state.
    pub fn norm_check(&self) -> Result<f64, JsaError> {
        let raw = raw_norm_integral(&self.spdc, &self.modulation)?;
        Ok(self.norm_sq * raw)
    }
}

/// N² of the unmodulated state:
/// √(σ₁²+σ₂²+σ_p²)/(πσ₁σ₂σ_p), or 1/(πσ₁σ₂) in the separable limit.
fn base_norm_sq(p: &SpdcParams) -> f64 {
    let s1 = p.sigma1 * p.sigma1;
    let s2 = p.sigma2 * p.sigma2;
    match p.sigma_p {
        PumpWidth::Finite(sp) => {
            fm::sqrt(s1 + s2 + sp * sp) / (core::f64::consts::PI * p.sigma1 * p.sigma2 * sp)
        }
        PumpWidth::Infinite => 1.0 / (core::f64::consts::PI * p.sigma1 * p.sigma2),
    }
}

/// ∬|ψ|² dω₁dω₂ with N = 1, by tensor Gauss-Hermite along the principal
/// axes of the Gaussian envelope (the narrow pump ridge at small σ_p makes
/// an axis-aligned grid useless).
fn raw_norm_integral(p: &SpdcParams, m: &ModulationSpec) -> Result<f64, JsaError> {
    // |ψ₀|² = exp(−x·M·x) in x = (ω₁−Ω, ω₂−Ω).
    let s1 = p.sigma1 * p.sigma1;
    let s2 = p.sigma2 * p.sigma2;
    let ip = match p.sigma_p {
        PumpWidth::Finite(sp) => 1.0 / (sp * sp),
        PumpWidth::Infinite => 0.0,
    };
    let (m11, m12, m22) = (1.0 / s1 + ip, ip, 1.0 / s2 + ip);
    // Closed-form 2×2 spectral decomposition.
    let theta = 0.5 * fm::atan2(2.0 * m12, m11 - m22);
    let (ct, st) = (fm::cos(theta), fm::sin(theta));
    let lam1 = m11 * ct * ct + 2.0 * m12 * st * ct + m22 * st * st;
    let lam2 = m11 * st * st - 2.0 * m12 * st * ct + m22 * ct * ct;
    let (sc1, sc2) = (1.0 / fm::sqrt(lam1), 1.0 / fm::sqrt(lam2));

    let rule = make_quadrature(QuadratureKind::GaussHermite, REFERENCE_QUAD_ORDER)?;
    let nodes = rule.nodes();
    let weights = rule.weights();
    let mut acc = 0.0f64;
    for (&u, &wu) in nodes.iter().zip(weights) {
        for (&v, &wv) in nodes.iter().zip(weights) {
            let x = sc1 * u * ct - sc2 * v * st;
            let y = sc1 * u * st + sc2 * v * ct;
            let expo = -(m11 * x * x + 2.0 * m12 * x * y + m22 * y * y);
            let factor = m.factor(p.omega + x);
            acc += wu * wv * fm::exp(expo) * factor * factor;
        }
    }
    Ok(acc * sc1 * sc2)
}
