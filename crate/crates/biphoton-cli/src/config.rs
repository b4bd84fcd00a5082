//! Plain-text key-value configuration files.
//!
//! A config file is a sequence of `key = value` lines; blank lines and lines
//! starting with `#` are skipped. Laboratory units at the boundary: widths in
//! THz, delays in fs, the modulation scale in as (or as a path difference in
//! nm), the pump width as a ratio of `sigma1`.
//!
//! Base keys: `sigma1_thz`, `sigma2_thz`, `sigma_p_ratio` (a positive float
//! or the word `infinite`), `omega_thz`, `tau1_fs`, `tau2_fs` (delays default
//! to 0), `modulation_kind` (`none` | `cosine` | `sine`, default `none`), and
//! exactly one of `beta_as` / `delta_l_nm` when the kind is not `none`.
//!
//! Sweep keys (required by the `sweep` subcommand, rejected by none): `axis`
//! (`beta` | `k` | `sigma_p` | `delta_tau`), `min`, `max`, `count`, `spacing`
//! (`linear` | `log`, default `linear`), `estimators` (comma-separated). A
//! key that the sweep axis itself supplies must be left out of the file: the
//! `beta` axis owns `beta_as`/`delta_l_nm`, the `k` and `sigma_p` axes own
//! `sigma_p_ratio`, and the `delta_tau` axis owns `tau1_fs`/`tau2_fs`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use biphoton_core::jsa::ModulationKind;

use crate::sweep::{Estimator, Spacing, SweepAxis};

#[derive(Debug)]
pub enum ConfigError {
    Io { path: String, source: std::io::Error },
    Syntax { line: usize, text: String },
    UnknownKey { line: usize, key: String },
    DuplicateKey { line: usize, key: String },
    InvalidValue { key: String, value: String, reason: String },
    MissingKey { key: &'static str },
    AxisOwnsKey { key: &'static str, axis: &'static str },
    ExclusiveKeys { a: &'static str, b: &'static str },
    MissingSweepSection,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read config {path}: {source}"),
            ConfigError::Syntax { line, text } => {
                write!(f, "config line {line}: expected `key = value`, got {text:?}")
            }
            ConfigError::UnknownKey { line, key } => {
                write!(f, "config line {line}: unknown key {key:?}")
            }
            ConfigError::DuplicateKey { line, key } => {
                write!(f, "config line {line}: duplicate key {key:?}")
            }
            ConfigError::InvalidValue { key, value, reason } => {
                write!(f, "config key {key}: invalid value {value:?} ({reason})")
            }
            ConfigError::MissingKey { key } => write!(f, "config is missing required key {key}"),
            ConfigError::AxisOwnsKey { key, axis } => {
                write!(f, "config key {key} must be omitted: the {axis} sweep axis supplies it")
            }
            ConfigError::ExclusiveKeys { a, b } => {
                write!(f, "config keys {a} and {b} are mutually exclusive")
            }
            ConfigError::MissingSweepSection => {
                write!(f, "config has no sweep keys (axis, min, max, count, estimators)")
            }
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Pump width at the boundary: a ratio of `sigma1`, or unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpRatio {
    Finite(f64),
    Infinite,
}

/// Base physical parameters in laboratory units, as read from the file.
#[derive(Debug, Clone)]
pub struct BaseConfig {
    pub sigma1_thz: f64,
    pub sigma2_thz: f64,
    pub sigma_p_ratio: Option<PumpRatio>,
    pub omega_thz: f64,
    pub tau1_fs: f64,
    pub tau2_fs: f64,
    pub modulation_kind: ModulationKind,
    /// Modulation scale in attoseconds, converted from `delta_l_nm` when the
    /// file gives a path difference instead.
    pub beta_as: Option<f64>,
}

impl BaseConfig {
    /// Reference parameters: 10 THz marginals, a pump at 0.01 of the signal
    /// width, 844.5 THz central frequency, zero delays, cosine modulation
    /// with the scale left open.
    pub fn reference() -> Self {
        BaseConfig {
            sigma1_thz: 10.0,
            sigma2_thz: 10.0,
            sigma_p_ratio: Some(PumpRatio::Finite(0.01)),
            omega_thz: 844.5,
            tau1_fs: 0.0,
            tau2_fs: 0.0,
            modulation_kind: ModulationKind::Cosine,
            beta_as: None,
        }
    }
}

/// Sweep grid and estimator selection in boundary units.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub estimators: Vec<Estimator>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub base: BaseConfig,
    pub sweep: Option<SweepConfig>,
}

pub fn parse_file(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_str(&text)
}

const KNOWN_KEYS: [&str; 15] = [
    "sigma1_thz",
    "sigma2_thz",
    "sigma_p_ratio",
    "omega_thz",
    "tau1_fs",
    "tau2_fs",
    "modulation_kind",
    "beta_as",
    "delta_l_nm",
    "axis",
    "min",
    "max",
    "count",
    "spacing",
    "estimators",
];

pub fn parse_str(text: &str) -> Result<Config, ConfigError> {
    let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(ConfigError::Syntax { line, text: trimmed.to_string() });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, key });
        }
        if seen.insert(key.clone(), (line, value)).is_some() {
            return Err(ConfigError::DuplicateKey { line, key });
        }
    }
    build(&seen)
}

fn take<'a>(map: &'a BTreeMap<String, (usize, String)>, key: &str) -> Option<&'a str> {
    map.get(key).map(|(_, v)| v.as_str())
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: "not a number".to_string(),
    })
}

fn require_f64(map: &BTreeMap<String, (usize, String)>, key: &'static str) -> Result<f64, ConfigError> {
    match take(map, key) {
        Some(v) => parse_f64(key, v),
        None => Err(ConfigError::MissingKey { key }),
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: format!("{v}"),
            reason: "must be a positive finite number".to_string(),
        })
    }
}

fn build(map: &BTreeMap<String, (usize, String)>) -> Result<Config, ConfigError> {
    let sigma1_thz = positive("sigma1_thz", require_f64(map, "sigma1_thz")?)?;
    let sigma2_thz = positive("sigma2_thz", require_f64(map, "sigma2_thz")?)?;
    let omega_thz = positive("omega_thz", require_f64(map, "omega_thz")?)?;
    let tau1_fs = match take(map, "tau1_fs") {
        Some(v) => parse_f64("tau1_fs", v)?,
        None => 0.0,
    };
    let tau2_fs = match take(map, "tau2_fs") {
        Some(v) => parse_f64("tau2_fs", v)?,
        None => 0.0,
    };

    let sigma_p_ratio = match take(map, "sigma_p_ratio") {
        Some("infinite") => Some(PumpRatio::Infinite),
        Some(v) => Some(PumpRatio::Finite(positive("sigma_p_ratio", parse_f64("sigma_p_ratio", v)?)?)),
        None => None,
    };

    let modulation_kind = match take(map, "modulation_kind") {
        None | Some("none") => ModulationKind::None,
        Some("cosine") => ModulationKind::Cosine,
        Some("sine") => ModulationKind::Sine,
        Some(other) => {
            return Err(ConfigError::InvalidValue {
                key: "modulation_kind".to_string(),
                value: other.to_string(),
                reason: "expected none, cosine, or sine".to_string(),
            })
        }
    };

    let beta_as = match (take(map, "beta_as"), take(map, "delta_l_nm")) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::ExclusiveKeys { a: "beta_as", b: "delta_l_nm" })
        }
        (Some(v), None) => {
            let b = parse_f64("beta_as", v)?;
            if !b.is_finite() || b < 0.0 {
                return Err(ConfigError::InvalidValue {
                    key: "beta_as".to_string(),
                    value: v.to_string(),
                    reason: "must be a non-negative finite number".to_string(),
                });
            }
            Some(b)
        }
        (None, Some(v)) => {
            let l = parse_f64("delta_l_nm", v)?;
            if !l.is_finite() || l < 0.0 {
                return Err(ConfigError::InvalidValue {
                    key: "delta_l_nm".to_string(),
                    value: v.to_string(),
                    reason: "must be a non-negative finite number".to_string(),
                });
            }
            let beta_s =
                biphoton_core::units::beta_from_path_difference(biphoton_core::units::meters_from_nm(l));
            Some(biphoton_core::units::as_from_seconds(beta_s))
        }
        (None, None) => None,
    };

    let sweep = build_sweep(map)?;

    if let Some(sw) = &sweep {
        match sw.axis {
            SweepAxis::Beta => {
                if map.contains_key("beta_as") {
                    return Err(ConfigError::AxisOwnsKey { key: "beta_as", axis: "beta" });
                }
                if map.contains_key("delta_l_nm") {
                    return Err(ConfigError::AxisOwnsKey { key: "delta_l_nm", axis: "beta" });
                }
            }
            SweepAxis::K => {
                if map.contains_key("sigma_p_ratio") {
                    return Err(ConfigError::AxisOwnsKey { key: "sigma_p_ratio", axis: "k" });
                }
            }
            SweepAxis::SigmaP => {
                if map.contains_key("sigma_p_ratio") {
                    return Err(ConfigError::AxisOwnsKey { key: "sigma_p_ratio", axis: "sigma_p" });
                }
            }
            SweepAxis::DeltaTau => {
                if map.contains_key("tau1_fs") {
                    return Err(ConfigError::AxisOwnsKey { key: "tau1_fs", axis: "delta_tau" });
                }
                if map.contains_key("tau2_fs") {
                    return Err(ConfigError::AxisOwnsKey { key: "tau2_fs", axis: "delta_tau" });
                }
            }
        }
    }

    Ok(Config {
        base: BaseConfig {
            sigma1_thz,
            sigma2_thz,
            sigma_p_ratio,
            omega_thz,
            tau1_fs,
            tau2_fs,
            modulation_kind,
            beta_as,
        },
        sweep,
    })
}

fn build_sweep(map: &BTreeMap<String, (usize, String)>) -> Result<Option<SweepConfig>, ConfigError> {
    let sweep_keys = ["axis", "min", "max", "count", "spacing", "estimators"];
    if !sweep_keys.iter().any(|k| map.contains_key(*k)) {
        return Ok(None);
    }

    let axis = match take(map, "axis") {
        None => return Err(ConfigError::MissingKey { key: "axis" }),
        Some("beta") => SweepAxis::Beta,
        Some("k") => SweepAxis::K,
        Some("sigma_p") => SweepAxis::SigmaP,
        Some("delta_tau") => SweepAxis::DeltaTau,
        Some(other) => {
            return Err(ConfigError::InvalidValue {
                key: "axis".to_string(),
                value: other.to_string(),
                reason: "expected beta, k, sigma_p, or delta_tau".to_string(),
            })
        }
    };

    let min = require_f64(map, "min")?;
    let max = require_f64(map, "max")?;
    let count = match take(map, "count") {
        None => return Err(ConfigError::MissingKey { key: "count" }),
        Some(v) => v.parse::<usize>().map_err(|_| ConfigError::InvalidValue {
            key: "count".to_string(),
            value: v.to_string(),
            reason: "not a non-negative integer".to_string(),
        })?,
    };
    let spacing = match take(map, "spacing") {
        None | Some("linear") => Spacing::Linear,
        Some("log") => Spacing::Log,
        Some(other) => {
            return Err(ConfigError::InvalidValue {
                key: "spacing".to_string(),
                value: other.to_string(),
                reason: "expected linear or log".to_string(),
            })
        }
    };

    let estimators = match take(map, "estimators") {
        None => return Err(ConfigError::MissingKey { key: "estimators" }),
        Some(v) => {
            let mut list = Vec::new();
            (|| {
                for name in v.split(',') {
                    let name = name.trim();
                    if name.is_empty() {
                        continue;
                    }
                    list.push(Estimator::from_name(name).ok_or_else(|| ConfigError::InvalidValue {
                        key: "estimators".to_string(),
                        value: name.to_string(),
                        reason: format!("expected one of {}", Estimator::NAMES.join(", ")),
                    })?);
                }
                Ok(())
            })()?;
            list
        }
    };

    Ok(Some(SweepConfig { axis, min, max, count, spacing, estimators }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# reference pair, first resonance
sigma1_thz = 10
sigma2_thz = 10
sigma_p_ratio = 0.01
omega_thz = 844.5
modulation_kind = cosine

axis = beta
min = 0
max = 1200
count = 5
spacing = linear
estimators = closed, approx_k_closed
";

    #[test]
    fn full_config_parses() {
        let cfg = parse_str(FULL).unwrap();
        assert_eq!(cfg.base.sigma1_thz, 10.0);
        assert_eq!(cfg.base.sigma_p_ratio, Some(PumpRatio::Finite(0.01)));
        assert_eq!(cfg.base.modulation_kind, ModulationKind::Cosine);
        assert_eq!(cfg.base.tau1_fs, 0.0);
        let sw = cfg.sweep.unwrap();
        assert_eq!(sw.axis, SweepAxis::Beta);
        assert_eq!(sw.count, 5);
        assert_eq!(sw.estimators, vec![Estimator::Closed, Estimator::ApproxKClosed]);
    }

    #[test]
    fn base_only_config_has_no_sweep() {
        let cfg = parse_str(
            "sigma1_thz = 10\nsigma2_thz = 12\nsigma_p_ratio = infinite\nomega_thz = 844.5\n",
        )
        .unwrap();
        assert_eq!(cfg.base.sigma_p_ratio, Some(PumpRatio::Infinite));
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn delta_l_converts_to_beta() {
        let cfg = parse_str(
            "sigma1_thz = 10\nsigma2_thz = 10\nsigma_p_ratio = 1\nomega_thz = 844.5\n\
             modulation_kind = cosine\ndelta_l_nm = 177.5\n",
        )
        .unwrap();
        let beta_as = cfg.base.beta_as.unwrap();
        let beta_s = biphoton_core::units::seconds_from_as(beta_as);
        let back = biphoton_core::units::nm_from_meters(
            biphoton_core::units::path_difference_from_beta(beta_s),
        );
        assert!((back - 177.5).abs() < 1e-9);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_str("sigma1_thz = 10\nwavelength_nm = 355\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 2, .. }));
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = parse_str("sigma1_thz = 10\nsigma1_thz = 11\n").unwrap_err();
        assert!(matches!(err, ConfigError::DuplicateKey { line: 2, .. }));
    }

    #[test]
    fn missing_required_key_is_rejected() {
        let err = parse_str("sigma1_thz = 10\nsigma2_thz = 10\nomega_thz = 844.5\naxis = beta\n")
            .unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey { key: "min" }));
    }

    #[test]
    fn beta_and_delta_l_are_exclusive() {
        let err = parse_str(
            "sigma1_thz = 10\nsigma2_thz = 10\nsigma_p_ratio = 1\nomega_thz = 844.5\n\
             modulation_kind = cosine\nbeta_as = 296\ndelta_l_nm = 177.5\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::ExclusiveKeys { .. }));
    }

    #[test]
    fn swept_key_must_be_absent() {
        let err = parse_str(
            "sigma1_thz = 10\nsigma2_thz = 10\nsigma_p_ratio = 0.1\nomega_thz = 844.5\n\
             axis = sigma_p\nmin = 0.01\nmax = 1\ncount = 10\nestimators = closed\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::AxisOwnsKey { key: "sigma_p_ratio", .. }));
    }

    #[test]
    fn bad_estimator_name_is_rejected() {
        let err = parse_str(
            "sigma1_thz = 10\nsigma2_thz = 10\nomega_thz = 844.5\n\
             axis = sigma_p\nmin = 0.01\nmax = 1\ncount = 10\nestimators = closed, kk\n",
        )
        .unwrap_err();
        match err {
            ConfigError::InvalidValue { key, value, .. } => {
                assert_eq!(key, "estimators");
                assert_eq!(value, "kk");
            }
            other => panic!("wrong error: {other}"),
        }
    }
}
