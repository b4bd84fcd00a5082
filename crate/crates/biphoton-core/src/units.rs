//! Unit conversions at the library boundary.
//!
//! Internally every frequency is an angular frequency in rad/s and every
//! delay is in seconds; the formulas only ever see the dimensionless
//! combinations (βσ, βΩ, Δτσ), so any consistent unit system works. These
//! helpers translate the field-friendly units used in configs and reports:
//! ordinary frequency in THz, delays in fs or as, interferometer path
//! differences in nm.

/// Speed of light, m/s (exact by definition).
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Angular frequency (rad/s) from ordinary frequency in THz:
/// 2π · 10¹² · ν.
pub fn angular_from_thz(nu_thz: f64) -> f64 {
    2.0 * core::f64::consts::PI * 1.0e12 * nu_thz
}

/// Ordinary frequency in THz from angular frequency in rad/s.
pub fn thz_from_angular(omega: f64) -> f64 {
    omega / (2.0 * core::f64::consts::PI * 1.0e12)
}

/// Seconds from femtoseconds.
pub fn seconds_from_fs(t_fs: f64) -> f64 {
    t_fs * 1.0e-15
}

/// Femtoseconds from seconds.
pub fn fs_from_seconds(t_s: f64) -> f64 {
    t_s * 1.0e15
}

/// Seconds from attoseconds.
pub fn seconds_from_as(t_as: f64) -> f64 {
    t_as * 1.0e-18
}

/// Attoseconds from seconds.
pub fn as_from_seconds(t_s: f64) -> f64 {
    t_s * 1.0e18
}

/// Meters from nanometers.
pub fn meters_from_nm(l_nm: f64) -> f64 {
    l_nm * 1.0e-9
}

/// Nanometers from meters.
pub fn nm_from_meters(l_m: f64) -> f64 {
    l_m * 1.0e9
}

/// Interferometer path-length difference ΔL (meters) equivalent to the delay
/// parameter β (seconds): ΔL = 2cβ.
pub fn path_difference_from_beta(beta_s: f64) -> f64 {
    2.0 * SPEED_OF_LIGHT_M_PER_S * beta_s
}

/// Delay parameter β (seconds) from the path-length difference ΔL (meters).
pub fn beta_from_path_difference(delta_l_m: f64) -> f64 {
    delta_l_m / (2.0 * SPEED_OF_LIGHT_M_PER_S)
}

/// Center of the n-th odd-harmonic delay resonance for carrier Ω (rad/s):
/// β_n = π(2n + 1)/(2Ω).
pub fn resonance_beta(order_n: u32, omega: f64) -> f64 {
    core::f64::consts::PI * (2.0 * order_n as f64 + 1.0) / (2.0 * omega)
}

/// Fractional detuning ε of a delay β from the resonance center β_n, in
/// units of the fundamental half-period: ε = (β − β_n)·2Ω/π.
pub fn epsilon_from_beta(beta_s: f64, order_n: u32, omega: f64) -> f64 {
    (beta_s - resonance_beta(order_n, omega)) * 2.0 * omega / core::f64::consts::PI
}
