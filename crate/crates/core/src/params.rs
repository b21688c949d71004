//! Waveform configuration and the derived time-frequency grid.
//!
//! A block of `S = R·T` samples is tiled by `K = S/Q` subcarriers and
//! `M = S/P` subsymbols. `P` (samples) and `Q` (DFT bins) are the time and
//! frequency steps of the lattice; `ν_t = P/R` and `ν_f = Q/T` compare them to
//! the critically sampled lattice.
//!
//! `Q` is an exact rational so that frequency-squeezed lattices (`ν_f < 1`
//! with a single subsymbol) remain expressible. `P` is always an integer
//! number of samples.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Exact non-negative rational used for lattice steps and scaling factors.
pub type Rational = Ratio<u64>;

/// Schema tag written into every serialized configuration.
pub const CONFIG_SCHEMA: &str = "v1";

/// Prototype pulse family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PulseKind {
    /// `R` consecutive unit samples followed by zeros.
    Rect,
    /// Frequency-sampled raised cosine, Nyquist for time step `P`.
    RaisedCosine { rolloff: f64 },
    /// Frequency-sampled root raised cosine.
    RootRaisedCosine { rolloff: f64 },
    /// Rectangular spectrum over `M` bins around DC.
    Dirichlet,
    /// Periodized Gaussian standing in for IOTA; `spread` scales the width
    /// relative to `R` samples.
    GaussianIota { spread: f64 },
}

impl PulseKind {
    pub fn rolloff(&self) -> Option<f64> {
        match *self {
            PulseKind::RaisedCosine { rolloff } | PulseKind::RootRaisedCosine { rolloff } => {
                Some(rolloff)
            }
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PulseKind::Rect => "rect",
            PulseKind::RaisedCosine { .. } => "raised_cosine",
            PulseKind::RootRaisedCosine { .. } => "root_raised_cosine",
            PulseKind::Dirichlet => "dirichlet",
            PulseKind::GaussianIota { .. } => "gaussian_iota",
        }
    }
}

/// Complete description of one waveform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    /// `R`
    pub samples_per_period: usize,
    /// `T`
    pub periods: usize,
    /// `P`, in samples.
    pub subsymbol_spacing: usize,
    /// `Q`, in DFT bins of the `S`-point block.
    #[serde(with = "rational_serde")]
    pub subcarrier_spacing: Rational,
    pub pulse_kind: PulseKind,
    #[serde(default)]
    pub oqam: bool,
    #[serde(default)]
    pub cp_length: usize,
    #[serde(default)]
    pub cs_window_length: usize,
    #[serde(default)]
    pub silent_subsymbols: usize,
    /// Prepend `cp_length` zeros instead of a cyclic prefix.
    #[serde(default)]
    pub zero_padding: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate_hz: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ConfigDocument {
    schema: String,
    #[serde(flatten)]
    config: WaveformConfig,
}

impl WaveformConfig {
    /// Lattice with integer steps, rect pulse and every optional feature off.
    pub fn new(r: usize, t: usize, p: usize, q: u64) -> Self {
        WaveformConfig {
            samples_per_period: r,
            periods: t,
            subsymbol_spacing: p,
            subcarrier_spacing: Rational::from_integer(q),
            pulse_kind: PulseKind::Rect,
            oqam: false,
            cp_length: 0,
            cs_window_length: 0,
            silent_subsymbols: 0,
            zero_padding: false,
            sample_rate_hz: None,
        }
    }

    pub fn with_pulse(mut self, kind: PulseKind) -> Self {
        self.pulse_kind = kind;
        self
    }

    pub fn with_cp(mut self, cp_length: usize) -> Self {
        self.cp_length = cp_length;
        self
    }

    pub fn with_oqam(mut self, oqam: bool) -> Self {
        self.oqam = oqam;
        self
    }

    pub fn with_silent_subsymbols(mut self, silent: usize) -> Self {
        self.silent_subsymbols = silent;
        self
    }

    pub fn total_samples(&self) -> usize {
        self.samples_per_period * self.periods
    }

    /// Serialize as a versioned JSON document.
    pub fn to_json(&self) -> String {
        let doc = ConfigDocument {
            schema: CONFIG_SCHEMA.to_string(),
            config: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("config serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigParseError> {
        let doc: ConfigDocument = serde_json::from_str(text)?;
        if doc.schema != CONFIG_SCHEMA {
            return Err(ConfigParseError::Schema(doc.schema));
        }
        Ok(doc.config)
    }

    /// Short stable hash of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialization is infallible");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }
}

#[derive(Debug, Error)]
pub enum ConfigParseError {
    #[error("malformed config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported config schema {0:?}, expected \"v1\"")]
    Schema(String),
}

/// Quantities derived from a valid configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridParams {
    /// `R`
    pub samples_per_period: usize,
    /// `T`
    pub periods: usize,
    /// `P`
    pub subsymbol_spacing: usize,
    /// `Q`
    #[serde(with = "rational_serde")]
    pub subcarrier_spacing: Rational,
    /// `S = R·T`
    pub s: usize,
    /// `K = S/Q`
    pub k: usize,
    /// `M = S/P`
    pub m: usize,
    /// `N = K·M`
    pub n: usize,
    #[serde(with = "rational_serde")]
    pub nu_t: Rational,
    #[serde(with = "rational_serde")]
    pub nu_f: Rational,
    #[serde(with = "rational_serde")]
    pub density: Rational,
}

impl GridParams {
    /// Both scaling factors equal one.
    pub fn is_critically_sampled(&self) -> bool {
        self.nu_t == Rational::from_integer(1) && self.nu_f == Rational::from_integer(1)
    }

    /// `Q` when it is a whole number of bins.
    pub fn integer_subcarrier_spacing(&self) -> Option<usize> {
        self.subcarrier_spacing
            .is_integer()
            .then(|| *self.subcarrier_spacing.numer() as usize)
    }

    /// Column index of position `(k, m)` in k-major order.
    pub fn column(&self, k: usize, m: usize) -> usize {
        k * self.m + m
    }
}

/// A configuration that passed [`validate_config`], paired with its grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedConfig {
    config: WaveformConfig,
    grid: GridParams,
}

impl ValidatedConfig {
    pub fn config(&self) -> &WaveformConfig {
        &self.config
    }

    pub fn grid(&self) -> &GridParams {
        &self.grid
    }

    pub fn into_config(self) -> WaveformConfig {
        self.config
    }
}

/// One violated constraint.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigViolation {
    #[error("{field} must be positive")]
    ZeroParameter { field: &'static str },
    #[error("non-integer grid: {what} = {numerator}/{denominator}")]
    NonIntegerGrid {
        what: &'static str,
        numerator: u64,
        denominator: u64,
    },
    #[error("silent subsymbols {silent} outside 0..={max}")]
    SilentSubsymbolsOutOfRange { silent: usize, max: usize },
    #[error("cyclic prefix {cp_length} not shorter than block length {s}")]
    CpTooLong { cp_length: usize, s: usize },
    #[error("window ramp {window} longer than cyclic prefix {cp_length}")]
    WindowTooLong { window: usize, cp_length: usize },
    #[error("rolloff {0} outside [0, 1]")]
    RolloffOutOfRange(f64),
    #[error("gaussian spread {0} must be positive and finite")]
    InvalidSpread(f64),
    #[error("sample rate {0} must be positive and finite")]
    InvalidSampleRate(f64),
}

/// Every violation found in a configuration.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("invalid waveform config: {}", join_violations(.0))]
pub struct ValidationError(pub Vec<ConfigViolation>);

fn join_violations(v: &[ConfigViolation]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

/// Derived grid of an already validated configuration.
pub fn derive_grid(config: &ValidatedConfig) -> GridParams {
    config.grid
}

fn compute_grid(config: &WaveformConfig) -> Result<GridParams, Vec<ConfigViolation>> {
    let mut violations = Vec::new();
    let fields = [
        ("samples_per_period", config.samples_per_period as u64),
        ("periods", config.periods as u64),
        ("subsymbol_spacing", config.subsymbol_spacing as u64),
        ("subcarrier_spacing", *config.subcarrier_spacing.numer()),
    ];
    for (field, value) in fields {
        if value == 0 {
            violations.push(ConfigViolation::ZeroParameter { field });
        }
    }
    if !violations.is_empty() {
        return Err(violations);
    }

    let r = config.samples_per_period as u64;
    let t = config.periods as u64;
    let p = config.subsymbol_spacing as u64;
    let q = config.subcarrier_spacing;
    let s = r * t;

    let k = Rational::from_integer(s) / q;
    if !k.is_integer() {
        violations.push(ConfigViolation::NonIntegerGrid {
            what: "subcarriers S/Q",
            numerator: *k.numer(),
            denominator: *k.denom(),
        });
    }
    if !s.is_multiple_of(p) {
        let m = Rational::new(s, p);
        violations.push(ConfigViolation::NonIntegerGrid {
            what: "subsymbols S/P",
            numerator: *m.numer(),
            denominator: *m.denom(),
        });
    }
    if !violations.is_empty() {
        return Err(violations);
    }

    let k = k.to_integer();
    let m = s / p;
    Ok(GridParams {
        samples_per_period: r as usize,
        periods: t as usize,
        subsymbol_spacing: p as usize,
        subcarrier_spacing: q,
        s: s as usize,
        k: k as usize,
        m: m as usize,
        n: (k * m) as usize,
        nu_t: Rational::new(p, r),
        nu_f: q / Rational::from_integer(t),
        density: Rational::new(k * m, s),
    })
}

/// Check every constraint and derive the grid, or report all violations.
pub fn validate_config(config: &WaveformConfig) -> Result<ValidatedConfig, ValidationError> {
    let mut violations = Vec::new();

    match config.pulse_kind {
        PulseKind::RaisedCosine { rolloff } | PulseKind::RootRaisedCosine { rolloff } => {
            if !(0.0..=1.0).contains(&rolloff) {
                violations.push(ConfigViolation::RolloffOutOfRange(rolloff));
            }
        }
        PulseKind::GaussianIota { spread } => {
            if !(spread.is_finite() && spread > 0.0) {
                violations.push(ConfigViolation::InvalidSpread(spread));
            }
        }
        PulseKind::Rect | PulseKind::Dirichlet => {}
    }
    if let Some(rate) = config.sample_rate_hz {
        if !(rate.is_finite() && rate > 0.0) {
            violations.push(ConfigViolation::InvalidSampleRate(rate));
        }
    }
    if config.cs_window_length > config.cp_length {
        violations.push(ConfigViolation::WindowTooLong {
            window: config.cs_window_length,
            cp_length: config.cp_length,
        });
    }

    let grid = match compute_grid(config) {
        Ok(grid) => Some(grid),
        Err(mut v) => {
            violations.append(&mut v);
            None
        }
    };

    if let Some(grid) = &grid {
        if config.cp_length >= grid.s {
            violations.push(ConfigViolation::CpTooLong {
                cp_length: config.cp_length,
                s: grid.s,
            });
        }
        // Zero silent subsymbols is always allowed, including M = 1.
        let max = grid.m.saturating_sub(2);
        if config.silent_subsymbols > 0 && config.silent_subsymbols > max {
            violations.push(ConfigViolation::SilentSubsymbolsOutOfRange {
                silent: config.silent_subsymbols,
                max,
            });
        }
    }

    match (grid, violations.is_empty()) {
        (Some(grid), true) => Ok(ValidatedConfig {
            config: config.clone(),
            grid,
        }),
        _ => Err(ValidationError(violations)),
    }
}

impl fmt::Display for GridParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S={} K={} M={} N={} nu_t={} nu_f={} density={}",
            self.s, self.k, self.m, self.n, self.nu_t, self.nu_f, self.density
        )
    }
}

/// Serde for [`Rational`]: integers as JSON numbers, fractions as `"n/d"`.
pub mod rational_serde {
    use super::Rational;
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_integer() {
            serializer.serialize_u64(*value.numer())
        } else {
            serializer.serialize_str(&format!("{}/{}", value.numer(), value.denom()))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        struct RationalVisitor;

        impl<'de> Visitor<'de> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or a fraction string \"n/d\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                u64::try_from(v)
                    .map(Rational::from_integer)
                    .map_err(|_| E::custom("negative value"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                super::parse_rational(v).ok_or_else(|| E::custom(format!("bad rational {v:?}")))
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

/// Parse `"n"` or `"n/d"` with `d > 0`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: u64 = n.trim().parse().ok()?;
            let d: u64 = d.trim().parse().ok()?;
            (d != 0).then(|| Rational::new(n, d))
        }
        None => text.parse().ok().map(Rational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(r: usize, t: usize, p: usize, q: u64) -> GridParams {
        *validate_config(&WaveformConfig::new(r, t, p, q))
            .expect("valid")
            .grid()
    }

    #[test]
    fn critically_sampled_figure_grid() {
        let g = ok(4, 5, 4, 5);
        assert_eq!((g.s, g.k, g.m, g.n), (20, 4, 5, 20));
        assert_eq!(g.nu_t, Rational::from_integer(1));
        assert_eq!(g.nu_f, Rational::from_integer(1));
        assert_eq!(g.density, Rational::from_integer(1));
        assert!(g.is_critically_sampled());
    }

    #[test]
    fn degenerate_single_symbol() {
        let g = ok(1, 1, 1, 1);
        assert_eq!((g.k, g.m, g.n), (1, 1, 1));
        assert_eq!(g.density, Rational::from_integer(1));
    }

    #[test]
    fn non_integer_then_fixed() {
        let err = validate_config(&WaveformConfig::new(8, 4, 8, 5)).unwrap_err();
        assert!(matches!(
            err.0[0],
            ConfigViolation::NonIntegerGrid { numerator: 32, denominator: 5, .. }
        ));
        let g = ok(8, 4, 8, 8);
        assert_eq!((g.s, g.k, g.m), (32, 4, 4));
        assert_eq!(g.nu_f, Rational::from_integer(2));
        assert_eq!(g.density, Rational::new(1, 2));
    }

    #[test]
    fn ofdm_like_config_is_valid() {
        let cfg = WaveformConfig::new(64, 1, 64, 1).with_cp(16);
        let v = validate_config(&cfg).unwrap();
        assert_eq!((v.grid().k, v.grid().m), (64, 1));
    }

    #[test]
    fn silent_subsymbols_boundary() {
        // M = 5
        let cfg = WaveformConfig::new(4, 5, 4, 5).with_silent_subsymbols(4);
        let err = validate_config(&cfg).unwrap_err();
        assert_eq!(
            err.0,
            vec![ConfigViolation::SilentSubsymbolsOutOfRange { silent: 4, max: 3 }]
        );
        assert!(validate_config(&cfg.with_silent_subsymbols(3)).is_ok());
        // M = 1 still admits zero silent subsymbols.
        assert!(validate_config(&WaveformConfig::new(8, 1, 8, 1)).is_ok());
    }

    #[test]
    fn rejects_q_not_dividing_s() {
        let err = validate_config(&WaveformConfig::new(6, 4, 6, 5)).unwrap_err();
        assert!(matches!(err.0[0], ConfigViolation::NonIntegerGrid { .. }));
    }

    #[test]
    fn collects_every_violation() {
        let mut cfg = WaveformConfig::new(4, 4, 4, 4)
            .with_pulse(PulseKind::RaisedCosine { rolloff: 1.5 })
            .with_cp(16);
        cfg.cs_window_length = 17;
        let err = validate_config(&cfg).unwrap_err();
        assert_eq!(err.0.len(), 3, "{err}");
        assert!(err.0.contains(&ConfigViolation::RolloffOutOfRange(1.5)));
        assert!(err.0.contains(&ConfigViolation::CpTooLong { cp_length: 16, s: 16 }));
    }

    #[test]
    fn fractional_subcarrier_spacing() {
        let mut cfg = WaveformConfig::new(8, 1, 8, 1);
        cfg.subcarrier_spacing = Rational::new(1, 2);
        let v = validate_config(&cfg).unwrap();
        assert_eq!((v.grid().s, v.grid().k, v.grid().n), (8, 16, 16));
        assert_eq!(v.grid().density, Rational::from_integer(2));
        assert_eq!(v.grid().integer_subcarrier_spacing(), None);
    }

    #[test]
    fn json_round_trip_and_schema() {
        let mut cfg = WaveformConfig::new(8, 1, 8, 1)
            .with_pulse(PulseKind::RootRaisedCosine { rolloff: 0.25 })
            .with_cp(2);
        cfg.subcarrier_spacing = Rational::new(3, 4);
        let text = cfg.to_json();
        assert!(text.contains("\"schema\": \"v1\""));
        assert!(text.contains("\"subcarrier_spacing\": \"3/4\""));
        assert_eq!(WaveformConfig::from_json(&text).unwrap(), cfg);

        let bad = text.replace("\"v1\"", "\"v2\"");
        assert!(matches!(
            WaveformConfig::from_json(&bad),
            Err(ConfigParseError::Schema(_))
        ));
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("4/5"), Some(Rational::new(4, 5)));
        assert_eq!(parse_rational(" 2 "), Some(Rational::from_integer(2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn table_identities(r in 1usize..16, t in 1usize..16, p in 1usize..32, q in 1u64..32) {
                let cfg = WaveformConfig::new(r, t, p, q);
                if let Ok(v) = validate_config(&cfg) {
                    let g = v.grid();
                    prop_assert_eq!(g.k as u64 * q, g.s as u64);
                    prop_assert_eq!(g.m * p, g.s);
                    prop_assert_eq!(g.density * Rational::from_integer(g.s as u64),
                                    Rational::from_integer(g.n as u64));
                    prop_assert_eq!(g.density, (g.nu_t * g.nu_f).recip());
                    prop_assert_eq!(g.is_critically_sampled(), p == r && q as usize == t);
                }
            }
        }
    }
}
