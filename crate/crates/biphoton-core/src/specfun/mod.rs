//! Orthogonal polynomials, oscillator eigenfunctions, the modified Bessel
//! function I₀, and Gaussian quadrature rules.
//!
//! Everything here is scale-free: arguments are dimensionless, callers are
//! responsible for nondimensionalizing physical frequencies first. Prefactors
//! involving factorials are accumulated in the log-gamma domain so that
//! expansion orders around n ≈ 10³ (routine for strongly entangled Schmidt
//! spectra) do not overflow.

use crate::fm;

mod quadrature;

pub use quadrature::{make_quadrature, QuadratureKind, QuadratureRule};

use core::fmt;

/// Errors from special-function evaluation and quadrature construction.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecFunError {
    /// Quadrature order outside the supported range [2, 4096].
    OrderOutOfRange { order: usize },
    /// Newton iteration for a quadrature node failed to converge.
    NoConvergence { kind: QuadratureKind, order: usize },
    /// Argument outside the function's domain (x ≥ 0 required).
    NegativeArgument { x: f64 },
    /// Result exceeds the representable floating-point range.
    Overflow { x: f64 },
}

impl fmt::Display for SpecFunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecFunError::OrderOutOfRange { order } => {
                write!(f, "quadrature order {order} outside supported range [2, 4096]")
            }
            SpecFunError::NoConvergence { kind, order } => {
                write!(f, "node iteration for {kind:?} rule of order {order} did not converge")
            }
            SpecFunError::NegativeArgument { x } => {
                write!(f, "argument {x:e} is negative; domain requires x >= 0")
            }
            SpecFunError::Overflow { x } => {
                write!(f, "result overflows f64 range at argument {x:e}")
            }
        }
    }
}

impl core::error::Error for SpecFunError {}

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence
/// H_{n+1} = 2x·H_n − 2n·H_{n−1}.
///
/// Exact for n ∈ {0, 1}. Overflows for very large n·x (the recurrence is run
/// in plain f64); use [`oscillator_eigenfunction`] when a normalized value is
/// what is actually needed.
///
/// # Examples
///
/// ```
/// use biphoton_core::specfun::hermite;
/// assert_eq!(hermite(0, 1.7), 1.0);
/// assert_eq!(hermite(3, 1.0), -4.0); // 8x³ − 12x at x = 1
/// ```
pub fn hermite(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 2.0 * x;
    for k in 1..n {
        let p2 = 2.0 * x * p1 - 2.0 * (k as f64) * p0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Exponent window used to rescale the orthonormal Hermite recurrence.
const RESCALE_EXP: i64 = 512;
const RESCALE_DOWN: f64 = 7.458340731200207e-155; // 2^-512
const RESCALE_THRESHOLD: f64 = 1.3407807929942597e154; // 2^512

/// Orthonormal Hermite values (h_n(x), h_{n−1}(x)) scaled by 2^exp2.
///
/// h_n = H_n/√(2ⁿ n! √π) is orthonormal with respect to e^{−x²}. The shared
/// power-of-two exponent keeps the recurrence in range for any (n, x) without
/// losing the ratio information Newton iterations and weights need.
pub(crate) fn hermite_ortho_scaled(n: u32, x: f64) -> (f64, f64, i64) {
    let mut p0 = 0.0f64;
    let mut p1 = 0.7511255444649425f64; // π^{-1/4}
    let mut exp2 = 0i64;
    for k in 0..n {
        let kf = k as f64;
        let p2 = x * fm::sqrt(2.0 / (kf + 1.0)) * p1 - fm::sqrt(kf / (kf + 1.0)) * p0;
        p0 = p1;
        p1 = p2;
        if fm::abs(p1) > RESCALE_THRESHOLD || fm::abs(p0) > RESCALE_THRESHOLD {
            p0 *= RESCALE_DOWN;
            p1 *= RESCALE_DOWN;
            exp2 += RESCALE_EXP;
        }
    }
    (p1, p0, exp2)
}

/// Quantum harmonic-oscillator eigenfunction
/// ψ_n(x) = (√π n! 2ⁿ)^{−1/2} H_n(x) e^{−x²/2}.
///
/// Computed by the normalized three-term recurrence with power-of-two
/// rescaling and a final log-domain assembly, so it stays finite and accurate
/// for n well beyond 2000 at any x (no factorial is ever formed).
///
/// # Examples
///
/// ```
/// use biphoton_core::specfun::oscillator_eigenfunction;
/// let v = oscillator_eigenfunction(0, 0.0);
/// assert!((v - 0.7511255444649425).abs() < 1e-15); // π^{-1/4}
/// assert_eq!(oscillator_eigenfunction(1, 0.0), 0.0);
/// ```
pub fn oscillator_eigenfunction(n: u32, x: f64) -> f64 {
    let (h, _, exp2) = hermite_ortho_scaled(n, x);
    if h == 0.0 {
        return 0.0;
    }
    if exp2 == 0 {
        // No rescale happened: direct product is the most accurate path.
        return h * fm::exp(-0.5 * x * x);
    }
    let ln_mag = fm::ln(fm::abs(h)) + (exp2 as f64) * core::f64::consts::LN_2 - 0.5 * x * x;
    if ln_mag < -745.0 {
        return 0.0;
    }
    let mag = fm::exp(ln_mag);
    if h < 0.0 {
        -mag
    } else {
        mag
    }
}

/// Associated Laguerre polynomial L_r^{(m)}(x) by the stable three-term
/// recurrence in the degree r.
///
/// # Examples
///
/// ```
/// use biphoton_core::specfun::assoc_laguerre;
/// assert_eq!(assoc_laguerre(0, 7, 3.4), 1.0);
/// assert_eq!(assoc_laguerre(1, 0, 2.0), -1.0); // 1 − x at x = 2
/// assert!((assoc_laguerre(2, 1, 1.0) - 0.5).abs() < 1e-15); // x²/2 − 3x + 3
/// ```
pub fn assoc_laguerre(r: u32, m: u32, x: f64) -> f64 {
    let mf = m as f64;
    if r == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 1.0 + mf - x;
    for k in 1..r {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 + mf - x) * p1 - (kf + mf) * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Natural log of the gamma function for x > 0 (Lanczos approximation,
/// accurate to full double precision).
pub fn ln_gamma(x: f64) -> f64 {
    const COF: [f64; 14] = [
        57.156_235_665_862_923,
        -59.597_960_355_475_49,
        14.136_097_974_741_746,
        -0.491_913_816_097_620_2,
        0.339_946_499_848_118_89e-4,
        0.465_236_289_270_485_76e-4,
        -0.983_744_753_048_795_65e-4,
        0.158_088_703_224_912_49e-3,
        -0.210_264_441_724_104_88e-3,
        0.217_439_618_115_212_64e-3,
        -0.164_318_106_536_763_89e-3,
        0.844_182_239_838_527_43e-4,
        -0.261_908_384_015_814_09e-4,
        0.368_991_826_595_316_23e-5,
    ];
    debug_assert!(x > 0.0);
    let tmp = x + 5.242_187_5;
    let tmp = (x + 0.5) * fm::ln(tmp) - tmp;
    let mut ser = 0.999_999_999_999_997_1;
    let mut y = x;
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    tmp + fm::ln(2.506_628_274_631_000_5 * ser / x)
}

/// Real radial part of the transition polynomial between oscillator modes p
/// and n displaced in momentum:
/// g(p, n, x) = √(r!/s!) · x^{(s−r)/2} · L_r^{(s−r)}(x), s = max(p,n),
/// r = min(p,n).
///
/// The factorial ratio is accumulated in the log-gamma domain. The parity
/// phase i^{s−r} that completes the full transition amplitude is left to the
/// caller; every downstream observable resolves it to a real sign.
/// Symmetric in (p, n); g(p, n, 0) = δ_pn and g(n, n, x) = L_n(x).
///
/// # Errors
///
/// Returns an error for x < 0.
pub fn g_polynomial(p: u32, n: u32, x: f64) -> Result<f64, SpecFunError> {
    if x < 0.0 {
        return Err(SpecFunError::NegativeArgument { x });
    }
    let (s, r) = if p >= n { (p, n) } else { (n, p) };
    let d = s - r;
    if d == 0 {
        return Ok(assoc_laguerre(r, 0, x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_ratio = 0.5 * (ln_gamma(r as f64 + 1.0) - ln_gamma(s as f64 + 1.0));
    let ln_pow = 0.5 * (d as f64) * fm::ln(x);
    Ok(assoc_laguerre(r, d, x) * fm::exp(ln_ratio + ln_pow))
}

/// Modified Bessel function of the first kind, I₀(x).
///
/// Power series for |x| ≤ 18 and the large-argument asymptotic expansion
/// beyond; relative error below 1e−12 across [0, 700].
///
/// # Errors
///
/// Signals overflow once e^{|x|}/√(2π|x|) exceeds the f64 range
/// (|x| ≳ 713).
pub fn bessel_i0(x: f64) -> Result<f64, SpecFunError> {
    let ax = fm::abs(x);
    if ax <= 18.0 {
        return Ok(i0_series(ax));
    }
    let ln_val = ax + fm::ln(i0_scaled_asymptotic(ax));
    if ln_val > 709.782712893384 {
        return Err(SpecFunError::Overflow { x });
    }
    Ok(fm::exp(ln_val))
}

/// Exponentially scaled modified Bessel function e^{−|x|}·I₀(x).
///
/// Never overflows; use it when I₀ appears in a ratio with other large
/// exponentials.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let ax = fm::abs(x);
    if ax <= 18.0 {
        i0_series(ax) * fm::exp(-ax)
    } else {
        i0_scaled_asymptotic(ax)
    }
}

fn i0_series(ax: f64) -> f64 {
    let q = 0.25 * ax * ax;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0u32;
    while term > sum * 1e-18 && k < 200 {
        k += 1;
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
    }
    sum
}

/// Asymptotic expansion of e^{−x}·I₀(x) for x > 18, truncated at the
/// smallest term.
fn i0_scaled_asymptotic(ax: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 0..40u32 {
        let kf = k as f64;
        let odd = 2.0 * kf + 1.0;
        term *= odd * odd / (8.0 * ax * (kf + 1.0));
        if term >= prev || term < sum * 1e-18 {
            break;
        }
        sum += term;
        prev = term;
    }
    sum / fm::sqrt(2.0 * core::f64::consts::PI * ax)
}
