//! Numerical core for biphoton Hong-Ou-Mandel (HOM) interference analysis.
//!
//! The crate models pure two-photon states by their joint spectral amplitude
//! (JSA) ψ(ω₁, ω₂) and computes the observables that govern HOM interference
//! of spectrally shaped photon pairs:
//!
//! * [`jsa`] — Gaussian SPDC joint spectral amplitudes, harmonic (Mach-Zehnder)
//!   spectral modulation, normalization, and the parity decomposition of the
//!   product spectral function φ₁₂.
//! * [`symmetry`] — the symmetry degree D_S = ∬ψ(ω₁,ω₂)ψ*(ω₂,ω₁)dω₁dω₂ and the
//!   coincidence probability P₂c = (1−D_S)/2, by four independent routes
//!   (two closed forms, a Hermite-series parity decomposition, and a direct
//!   quadrature oracle), plus the finite detector-gate integral.
//! * [`schmidt`] — Schmidt spectra and Schmidt numbers: the exact geometric
//!   spectrum of the Gaussian state, and numeric / perturbative / heuristic /
//!   closed-form estimates for cosine-modulated states.
//! * [`resonance`] — antibunching-resonance location, half-width metrology and
//!   unit conversions between the time-delay parameter β, the interferometer
//!   path-length difference ΔL = 2cβ, and dimensionless detunings.
//! * [`specfun`] — the orthogonal polynomials, oscillator eigenfunctions,
//!   modified Bessel function, and Gaussian quadrature rules everything else
//!   is built on.
//! * [`eigen`] — a dense symmetric eigenvalue solver (Householder reduction
//!   followed by implicit-shift QL) for reduced density matrices.
//!
//! All frequencies are angular (rad/s) and all times are seconds unless a
//! function documents otherwise; conversions from laboratory units (THz, fs,
//! as, nm) live in [`units`].
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only switches float math from `libm` to the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod fm;

pub mod eigen;
pub mod jsa;
pub mod resonance;
pub mod schmidt;
pub mod specfun;
pub mod symmetry;
pub mod units;

/// Crate version, embedded by downstream tools in result headers so that
/// archived outputs identify the numerics that produced them.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
