//! System parameters, unit conversion and the derived constants shared by the
//! analytic and simulation paths.
//!
//! Everything inside the crate is in linear SI units (watts, metres, hertz).
//! Decibel quantities only appear at the parameter-file boundary.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::sinc_norm;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("parameter `{field}` = {value} violates {bound}")]
    InvalidRange {
        field: String,
        value: f64,
        bound: String,
    },
    #[error("parameter `{field}`: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("cannot parse parameter file: {0}")]
    Parse(String),
    #[error("cannot read parameter file: {0}")]
    Io(String),
}

/// Decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// A single raw parameter value as it appears in a parameter file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Flag(bool),
    Number(f64),
}

/// Raw, unit-carrying parameters keyed by lower-case names.
///
/// Keys follow the parameter table: `p_d`, `p_c` (dBm), `r` (m), `b_w` (MHz),
/// `n_0` (dBm), `f` (dB), `f_c` (GHz), `r_00` (m), `alpha_d`, `alpha_c`,
/// `a_d`, `a_c` (dB attenuation), `eta`, `c_0`, `c_1`, `c_2` (W), `mc`, plus
/// the scenario variables `u_c`, `t_c` and `lambda_d` (m⁻²). The optional
/// keys `apply_noise_figure` (bool) and `noise_psd` (dBm/Hz, replaces `n_0`
/// by `noise_psd + 10·log10(B_w)`) tune the noise floor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    values: BTreeMap<String, ParamValue>,
}

/// Keys that `build_config` requires.
pub const REQUIRED_KEYS: &[&str] = &[
    "p_c", "p_d", "r", "b_w", "n_0", "f", "r_00", "alpha_c", "alpha_d", "a_c", "a_d", "u_c",
    "t_c", "lambda_d",
];

/// Every key a parameter file may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "p_c",
    "p_d",
    "r",
    "b_w",
    "n_0",
    "f",
    "f_c",
    "r_00",
    "alpha_c",
    "alpha_d",
    "a_c",
    "a_d",
    "eta",
    "c_0",
    "c_1",
    "c_2",
    "mc",
    "u_c",
    "t_c",
    "lambda_d",
    "apply_noise_figure",
    "noise_psd",
];

/// The parameter table verbatim, plus the scenario defaults
/// `u_c = 4`, `t_c = 20`, `lambda_d = 1e-5`.
pub const DEFAULTS_TOML: &str = r#"# System and simulation parameters (file units)
p_d = 6.0          # D2D TX power [dBm]
p_c = 30.0         # BS TX power [dBm]
r = 500.0          # cell radius [m]
b_w = 20.0         # bandwidth [MHz]
n_0 = -131.0       # thermal noise power [dBm]
f = 5.0            # noise figure in UE [dB]
f_c = 2.0          # carrier frequency [GHz], informational only
r_00 = 35.0        # D2D pair distance [m]
alpha_d = 3.0      # pathloss exponent between devices
alpha_c = 3.67     # pathloss exponent between BS and device
a_d = 38.84        # pathloss coefficient between devices [dB attenuation]
a_c = 30.55        # pathloss coefficient between BS and device [dB attenuation]
eta = 0.3          # amplifier efficiency
c_0 = 5.0          # load-independent power in BS [W]
c_1 = 0.5          # power per BS antenna [W]
c_2 = 0.1          # power per UE handset [W]
mc = 5000          # Monte Carlo runs

# scenario
u_c = 4
t_c = 20
lambda_d = 1e-5
apply_noise_figure = true
"#;

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The embedded `defaults` preset.
    pub fn defaults() -> Self {
        Self::from_toml_str(DEFAULTS_TOML).expect("embedded defaults parse")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        Self::from_toml_table(&table)
    }

    pub fn from_toml_table(table: &toml::Table) -> Result<Self, ConfigError> {
        let mut set = ParamSet::new();
        for (key, value) in table {
            let v = match value {
                toml::Value::Float(x) => ParamValue::Number(*x),
                toml::Value::Integer(i) => ParamValue::Number(*i as f64),
                toml::Value::Boolean(b) => ParamValue::Flag(*b),
                other => {
                    return Err(ConfigError::InvalidValue {
                        field: key.clone(),
                        reason: format!("expected a number or boolean, found {}", other.type_str()),
                    })
                }
            };
            set.insert(key, v)?;
        }
        Ok(set)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Inserts a value; keys are matched case-insensitively.
    pub fn insert(&mut self, key: &str, value: ParamValue) -> Result<(), ConfigError> {
        let key = normalize_key(key);
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::InvalidValue {
                field: key,
                reason: "unknown parameter".into(),
            });
        }
        self.values.insert(key, value);
        Ok(())
    }

    pub fn set_number(&mut self, key: &str, value: f64) -> Result<(), ConfigError> {
        self.insert(key, ParamValue::Number(value))
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(&normalize_key(key));
    }

    /// `other` wins on conflicts.
    pub fn overlay(&self, other: &ParamSet) -> ParamSet {
        let mut merged = self.clone();
        for (k, v) in &other.values {
            merged.values.insert(k.clone(), *v);
        }
        merged
    }

    pub fn number(&self, key: &str) -> Result<f64, ConfigError> {
        match self.values.get(&normalize_key(key)) {
            Some(ParamValue::Number(x)) if x.is_finite() => Ok(*x),
            Some(ParamValue::Number(x)) => Err(ConfigError::InvalidValue {
                field: key.into(),
                reason: format!("{x} is not finite"),
            }),
            Some(ParamValue::Flag(_)) => Err(ConfigError::InvalidValue {
                field: key.into(),
                reason: "expected a number".into(),
            }),
            None => Err(ConfigError::MissingParameter(key.into())),
        }
    }

    pub fn optional_number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.number(key) {
            Ok(x) => Ok(Some(x)),
            Err(ConfigError::MissingParameter(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn flag(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.values.get(&normalize_key(key)) {
            Some(ParamValue::Flag(b)) => Ok(*b),
            Some(ParamValue::Number(_)) => Err(ConfigError::InvalidValue {
                field: key.into(),
                reason: "expected true or false".into(),
            }),
            None => Ok(default),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace(['-', ' '], "_")
}

/// Physical and system parameters in linear SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// BS total transmit power [W].
    pub p_c: f64,
    /// D2D transmit power [W].
    pub p_d: f64,
    /// Cell radius [m].
    pub radius: f64,
    /// Channel bandwidth [Hz].
    pub bandwidth: f64,
    /// Effective receiver noise power [W], identical for both tiers.
    pub noise_power: f64,
    /// Distance between a D2D transmitter and its receiver [m].
    pub d2d_pair_distance: f64,
    pub alpha_c: f64,
    pub alpha_d: f64,
    /// BS-device pathloss coefficient, linear attenuation (< 1 in practice).
    pub a_c: f64,
    /// Device-device pathloss coefficient, linear attenuation.
    pub a_d: f64,
    /// Number of served cellular users.
    pub n_cue: usize,
    /// Number of BS antennas.
    pub n_antennas: usize,
    /// D2D transmitter density [m⁻²].
    pub lambda_d: f64,
    /// Carrier frequency [Hz]. Recorded only; no formula uses it.
    pub carrier_frequency: f64,
}

impl SystemConfig {
    /// Parameter table with `u_c = 4`, `t_c = 20`, `lambda_d = 1e-5`.
    pub fn table_defaults() -> Self {
        build_config(&ParamSet::defaults()).expect("embedded defaults are valid")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("p_c", self.p_c),
            ("p_d", self.p_d),
            ("radius", self.radius),
            ("bandwidth", self.bandwidth),
            ("noise_power", self.noise_power),
            ("d2d_pair_distance", self.d2d_pair_distance),
            ("a_c", self.a_c),
            ("a_d", self.a_d),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(range(field, value, "finite and > 0"));
            }
        }
        if !(self.alpha_c.is_finite() && self.alpha_c > 2.0) {
            return Err(range("alpha_c", self.alpha_c, "alpha_c > 2"));
        }
        if !(self.alpha_d.is_finite() && self.alpha_d > 2.0) {
            return Err(range("alpha_d", self.alpha_d, "alpha_d > 2"));
        }
        if !(self.lambda_d.is_finite() && self.lambda_d >= 0.0) {
            return Err(range("lambda_d", self.lambda_d, "finite and >= 0"));
        }
        if self.n_cue < 1 {
            return Err(range("n_cue", self.n_cue as f64, "1 <= U_c"));
        }
        if self.n_cue > self.n_antennas {
            return Err(range(
                "n_cue",
                self.n_cue as f64,
                &format!("U_c <= T_c = {}", self.n_antennas),
            ));
        }
        Ok(())
    }

    pub fn derived(&self) -> DerivedConstants {
        derive_constants(self)
    }

    /// `T_c − U_c`, the number of spare spatial dimensions.
    pub fn spare_antennas(&self) -> usize {
        self.n_antennas - self.n_cue
    }

    /// Average number of D2D transmitters inside the cell, πR²λ_d.
    pub fn mean_d2d_in_cell(&self) -> f64 {
        PI * self.radius * self.radius * self.lambda_d
    }
}

fn range(field: &str, value: f64, bound: &str) -> ConfigError {
    ConfigError::InvalidRange {
        field: field.into(),
        value,
        bound: bound.into(),
    }
}

fn positive_integer(raw: &ParamSet, key: &str) -> Result<usize, ConfigError> {
    let x = raw.number(key)?;
    if x < 1.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
        return Err(range(key, x, "a positive integer"));
    }
    Ok(x as usize)
}

/// Converts file-unit parameters into a validated [`SystemConfig`].
pub fn build_config(raw: &ParamSet) -> Result<SystemConfig, ConfigError> {
    for key in REQUIRED_KEYS {
        if key == &"n_0" && raw.optional_number("noise_psd")?.is_some() {
            continue;
        }
        raw.number(key)?;
    }
    let bandwidth = raw.number("b_w")? * 1e6;
    if !(bandwidth > 0.0) {
        return Err(range("b_w", bandwidth / 1e6, "> 0 MHz"));
    }
    let thermal_dbm = match raw.optional_number("noise_psd")? {
        Some(psd) => psd + linear_to_db(bandwidth),
        None => raw.number("n_0")?,
    };
    let figure_db = if raw.flag("apply_noise_figure", true)? {
        raw.number("f")?
    } else {
        0.0
    };
    let cfg = SystemConfig {
        p_c: dbm_to_watts(raw.number("p_c")?),
        p_d: dbm_to_watts(raw.number("p_d")?),
        radius: raw.number("r")?,
        bandwidth,
        noise_power: dbm_to_watts(thermal_dbm + figure_db),
        d2d_pair_distance: raw.number("r_00")?,
        alpha_c: raw.number("alpha_c")?,
        alpha_d: raw.number("alpha_d")?,
        a_c: db_to_linear(-raw.number("a_c")?),
        a_d: db_to_linear(-raw.number("a_d")?),
        n_cue: positive_integer(raw, "u_c")?,
        n_antennas: positive_integer(raw, "t_c")?,
        lambda_d: raw.number("lambda_d")?,
        carrier_frequency: raw.optional_number("f_c")?.unwrap_or(2.0) * 1e9,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Constants that recur in the coverage expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// ζ = A_c·P_c/U_c, per-user BS power after pathloss coefficient.
    pub zeta: f64,
    /// κ = ζ / (P_d·A_d·R₀₀^−α_d), BS-to-D2D power ratio at the pair distance.
    pub kappa: f64,
    /// C_d = π·P_d^(2/α_d) / sinc(2/α_d).
    pub c_d: f64,
    /// Average D2D SNR, A_d·R₀₀^−α_d·P_d / N₀.
    pub gamma_bar_d: f64,
}

pub fn derive_constants(cfg: &SystemConfig) -> DerivedConstants {
    let zeta = cfg.a_c * cfg.p_c / cfg.n_cue as f64;
    let pair_gain = cfg.a_d * cfg.d2d_pair_distance.powf(-cfg.alpha_d);
    let delta = 2.0 / cfg.alpha_d;
    DerivedConstants {
        zeta,
        kappa: zeta / (cfg.p_d * pair_gain),
        c_d: PI * cfg.p_d.powf(delta) / sinc_norm(delta),
        gamma_bar_d: pair_gain * cfg.p_d / cfg.noise_power,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn dbm_conversions() {
        let cfg = SystemConfig::table_defaults();
        assert!(rel(cfg.p_c, 1.0) < 1e-15);
        assert!(rel(cfg.p_d, 3.981_071_705_534_972e-3) < 1e-14);
        // -131 dBm + 5 dB
        assert!(rel(cfg.noise_power, dbm_to_watts(-126.0)) < 1e-14);
        assert_eq!(cfg.bandwidth, 20e6);
    }

    #[test]
    fn rejects_more_users_than_antennas() {
        let mut raw = ParamSet::defaults();
        raw.set_number("u_c", 5.0).unwrap();
        raw.set_number("t_c", 4.0).unwrap();
        match build_config(&raw) {
            Err(ConfigError::InvalidRange { field, .. }) => assert_eq!(field, "n_cue"),
            other => panic!("expected InvalidRange, got {other:?}"),
        }
    }

    #[test]
    fn missing_key_is_named() {
        let mut raw = ParamSet::defaults();
        raw.remove("alpha_c");
        assert_eq!(
            build_config(&raw),
            Err(ConfigError::MissingParameter("alpha_c".into()))
        );
    }

    #[test]
    fn exponent_bound() {
        let mut raw = ParamSet::defaults();
        raw.set_number("alpha_d", 2.0).unwrap();
        assert!(matches!(
            build_config(&raw),
            Err(ConfigError::InvalidRange { .. })
        ));
    }

    #[test]
    fn keys_are_case_insensitive() {
        let raw = ParamSet::from_toml_str("P_C = 33\nAlpha_D = 3.5").unwrap();
        assert_eq!(raw.number("p_c").unwrap(), 33.0);
        assert_eq!(raw.number("alpha_d").unwrap(), 3.5);
        assert!(ParamSet::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn noise_figure_toggle_and_psd_override() {
        let mut raw = ParamSet::defaults();
        raw.insert("apply_noise_figure", ParamValue::Flag(false)).unwrap();
        let cfg = build_config(&raw).unwrap();
        assert!(rel(cfg.noise_power, dbm_to_watts(-131.0)) < 1e-14);

        raw.set_number("noise_psd", -174.0).unwrap();
        let cfg = build_config(&raw).unwrap();
        // -174 dBm/Hz over 20 MHz = -100.99 dBm
        assert!((watts_to_dbm(cfg.noise_power) - (-174.0 + 73.010_299_956_639_81)).abs() < 1e-9);
    }

    #[test]
    fn zeta_scales_with_users() {
        let mut cfg = SystemConfig::table_defaults();
        let z1 = cfg.derived().zeta;
        cfg.n_cue *= 2;
        assert!(rel(cfg.derived().zeta, z1 / 2.0) < 1e-15);
    }

    #[test]
    fn table_constants_match_hand_evaluation() {
        // Values from an independent 40-digit evaluation of the definitions.
        let cfg = SystemConfig::table_defaults();
        let d = cfg.derived();
        assert!(rel(d.zeta, 2.202_622_182_520_035e-4) < 1e-12);
        assert!(rel(d.kappa, 1.816_118_329_854_48e7) < 1e-12);
        assert!(rel(d.c_d, 0.190_843_711_752_012_1) < 1e-12);
        assert!(rel(d.gamma_bar_d, 4.828_318_014_672_985e4) < 1e-12);
    }

    proptest! {
        #[test]
        fn db_round_trip(x in -200.0f64..200.0) {
            let back = linear_to_db(db_to_linear(x));
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn kappa_depends_on_power_ratio_only(c in 1e-3f64..1e3) {
            let cfg = SystemConfig::table_defaults();
            let mut scaled = cfg.clone();
            scaled.p_c *= c;
            scaled.p_d *= c;
            prop_assert!(rel(scaled.derived().kappa, cfg.derived().kappa) < 1e-12);
        }
    }
}
