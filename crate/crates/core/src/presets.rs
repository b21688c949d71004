//! Named waveform families as GFDM parameter sets.
//!
//! Each preset fixes the structural fields of its family (pulse, grid
//! scaling, offset modulation, prefix, silent subsymbols) and takes sizes
//! from [`SizeHints`].

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{orthogonality_metrics, OrthogonalityMetrics};
use crate::error::Error;
use crate::link::{Constellation, Transceiver};
use crate::modem::{self, Receiver};
use crate::params::{validate_config, PulseKind, Rational, ValidatedConfig, WaveformConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Gfdm,
    Ofdm,
    BlockOfdm,
    ScFde,
    ScFdm,
    FbmcOqam,
    FbmcFmt,
    FbmcCoqam,
    CbFmt,
    Ftn,
    Sefdm,
}

impl PresetName {
    pub const ALL: [PresetName; 11] = [
        PresetName::Gfdm,
        PresetName::Ofdm,
        PresetName::BlockOfdm,
        PresetName::ScFde,
        PresetName::ScFdm,
        PresetName::FbmcOqam,
        PresetName::FbmcFmt,
        PresetName::FbmcCoqam,
        PresetName::CbFmt,
        PresetName::Ftn,
        PresetName::Sefdm,
    ];

    /// Command-line spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Gfdm => "gfdm",
            PresetName::Ofdm => "ofdm",
            PresetName::BlockOfdm => "block-ofdm",
            PresetName::ScFde => "sc-fde",
            PresetName::ScFdm => "sc-fdm",
            PresetName::FbmcOqam => "fbmc-oqam",
            PresetName::FbmcFmt => "fbmc-fmt",
            PresetName::FbmcCoqam => "fbmc-coqam",
            PresetName::CbFmt => "cb-fmt",
            PresetName::Ftn => "ftn",
            PresetName::Sefdm => "sefdm",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PresetName::Gfdm => "GFDM",
            PresetName::Ofdm => "OFDM",
            PresetName::BlockOfdm => "block OFDM",
            PresetName::ScFde => "SC-FDE",
            PresetName::ScFdm => "SC-FDM",
            PresetName::FbmcOqam => "FBMC-OQAM",
            PresetName::FbmcFmt => "FBMC-FMT",
            PresetName::FbmcCoqam => "FBMC-COQAM",
            PresetName::CbFmt => "CB-FMT",
            PresetName::Ftn => "FTN",
            PresetName::Sefdm => "SEFDM",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = PresetError;

    /// Case-insensitive; `-`, `_` and spaces are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let squash = |t: &str| -> String {
            t.chars()
                .filter(|c| !matches!(c, '-' | '_' | ' '))
                .map(|c| c.to_ascii_lowercase())
                .collect()
        };
        let wanted = squash(s);
        PresetName::ALL
            .into_iter()
            .find(|p| squash(p.as_str()) == wanted)
            .ok_or_else(|| PresetError::UnknownPreset(s.to_string()))
    }
}

/// Yes, no, or "(yes)": holds only for some parameter choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Yes,
    No,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    pub orthogonal: Claim,
    pub cp: bool,
    pub offset: Claim,
    pub cyclic_filter: bool,
}

/// One column of the waveform family table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PresetDescriptor {
    pub name: PresetName,
    pub label: &'static str,
    pub subcarriers: &'static str,
    pub subsymbols: &'static str,
    pub scaling_freq: &'static str,
    pub scaling_time: &'static str,
    pub silent_subsymbols: &'static str,
    pub filter: &'static str,
    pub claims: Claims,
    pub scenario_tag: &'static str,
    pub feature: &'static str,
}

pub fn descriptor(name: PresetName) -> PresetDescriptor {
    use Claim::{Conditional, No, Yes};
    #[rustfmt::skip]
    let (sub_k, sub_m, nu_f, nu_t, silent, filter, offset, cp, orthogonal, scenario, feature) = match name {
        PresetName::Gfdm => ("K", "M", "nu_f", "nu_t", "M_s", "cyclic", Conditional, true, Conditional, "all", "flex."),
        PresetName::Ofdm => ("K", "1", "1", "1", "-", "rect", Conditional, true, Yes, "legacy systems", "orth."),
        PresetName::BlockOfdm => ("K", "M", "1", "1", "-", "rect", No, true, Yes, "bitpipe", "small CP overhead"),
        PresetName::ScFde => ("1", "M", "1", "1", "-", "Dirichlet", No, true, Yes, "IoT/MTC", "low PAPR"),
        PresetName::ScFdm => ("K", "M", "1", "1", "-", "Dirichlet", No, true, Yes, "IoT/MTC", "low PAPR"),
        PresetName::FbmcOqam => ("K", "M", "1", "1", "M_p", "sqrt-Nyquist", Yes, false, Yes, "WRAN, bitpipe", "low OOB"),
        PresetName::FbmcFmt => ("K", "M", ">1", "1", "M_p", "sqrt-Nyquist", No, false, Yes, "WRAN", "low OOB"),
        PresetName::FbmcCoqam => ("K", "M", "1", "1", "-", "cyclic", Yes, true, Yes, "tactile Internet", "no filter tail"),
        PresetName::CbFmt => ("K", "M", ">1", "1", "-", "cyclic", No, true, Yes, "tactile Internet", "no filter tail"),
        PresetName::Ftn => ("K", "M", "1", "<1", "M_p", "IOTA", Yes, false, No, "bitpipe", "spectral eff."),
        PresetName::Sefdm => ("K", "1", "<1", "1", "-", "rect", No, true, No, "bitpipe", "spectral eff."),
    };
    PresetDescriptor {
        name,
        label: name.label(),
        subcarriers: sub_k,
        subsymbols: sub_m,
        scaling_freq: nu_f,
        scaling_time: nu_t,
        silent_subsymbols: silent,
        filter,
        claims: Claims {
            orthogonal,
            cp,
            offset,
            cyclic_filter: !matches!(name, PresetName::FbmcOqam | PresetName::FbmcFmt | PresetName::Ftn),
        },
        scenario_tag: scenario,
        feature,
    }
}

/// Optional sizes; unset fields take the preset's defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SizeHints {
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub cp: Option<usize>,
    pub rolloff: Option<f64>,
    pub nu_t: Option<Rational>,
    pub nu_f: Option<Rational>,
    pub silent_subsymbols: Option<usize>,
}

impl SizeHints {
    pub fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn cp(mut self, cp: usize) -> Self {
        self.cp = Some(cp);
        self
    }

    pub fn rolloff(mut self, rolloff: f64) -> Self {
        self.rolloff = Some(rolloff);
        self
    }

    pub fn nu_t(mut self, nu_t: Rational) -> Self {
        self.nu_t = Some(nu_t);
        self
    }

    pub fn nu_f(mut self, nu_f: Rational) -> Self {
        self.nu_f = Some(nu_f);
        self
    }

    pub fn silent_subsymbols(mut self, silent: usize) -> Self {
        self.silent_subsymbols = Some(silent);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresetError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("{preset}: hint {hint} is incompatible: {reason}")]
    IncompatibleHint {
        preset: PresetName,
        hint: &'static str,
        reason: String,
    },
    #[error("{preset}: measured {claim} contradicts the family table: {detail}")]
    ClaimViolated {
        preset: PresetName,
        claim: &'static str,
        detail: String,
    },
}

impl PresetError {
    pub fn code(&self) -> &'static str {
        match self {
            PresetError::UnknownPreset(_) => "presets.unknown_preset",
            PresetError::IncompatibleHint { .. } => "presets.incompatible_hint",
            PresetError::ClaimViolated { .. } => "presets.claim_violated",
        }
    }

    pub fn is_validation(&self) -> bool {
        !matches!(self, PresetError::ClaimViolated { .. })
    }
}

/// Per-family structure and default sizes.
struct Template {
    k: usize,
    m: usize,
    nu_t: Rational,
    nu_f: Rational,
    pulse: PulseKind,
    oqam: bool,
    cp: fn(usize, usize) -> usize,
    silent: usize,
}

fn template(name: PresetName) -> Template {
    let one = Rational::from_integer(1);
    let two = Rational::from_integer(2);
    let rc = PulseKind::RaisedCosine { rolloff: 0.5 };
    let rrc = PulseKind::RootRaisedCosine { rolloff: 0.5 };
    let base = |k, m, pulse, cp: fn(usize, usize) -> usize| Template {
        k,
        m,
        nu_t: one,
        nu_f: one,
        pulse,
        oqam: false,
        cp,
        silent: 0,
    };
    let no_cp: fn(usize, usize) -> usize = |_, _| 0;
    let eighth: fn(usize, usize) -> usize = |_, s| s / 8;
    let quarter_k: fn(usize, usize) -> usize = |k, _| k / 4;
    match name {
        PresetName::Gfdm => base(16, 5, rc, eighth),
        PresetName::Ofdm => base(64, 1, PulseKind::Rect, quarter_k),
        PresetName::BlockOfdm => base(16, 4, PulseKind::Rect, quarter_k),
        PresetName::ScFde => base(1, 64, PulseKind::Dirichlet, |_, s| s / 4),
        PresetName::ScFdm => base(8, 16, PulseKind::Dirichlet, eighth),
        PresetName::FbmcOqam => Template {
            oqam: true,
            silent: 2,
            ..base(16, 8, rrc, no_cp)
        },
        PresetName::FbmcFmt => Template {
            nu_f: two,
            silent: 2,
            ..base(8, 8, rrc, no_cp)
        },
        PresetName::FbmcCoqam => Template {
            oqam: true,
            ..base(16, 8, rrc, eighth)
        },
        PresetName::CbFmt => Template {
            nu_f: two,
            ..base(8, 8, rrc, eighth)
        },
        PresetName::Ftn => Template {
            nu_t: Rational::new(4, 5),
            oqam: true,
            silent: 2,
            ..base(10, 10, PulseKind::GaussianIota { spread: 1.0 }, no_cp)
        },
        PresetName::Sefdm => Template {
            nu_f: Rational::new(1, 2),
            ..base(16, 1, PulseKind::Rect, |_, s| s / 4)
        },
    }
}

fn check_hints(name: PresetName, hints: &SizeHints) -> Result<(), PresetError> {
    let bad = |hint: &'static str, reason: &str| {
        Err(PresetError::IncompatibleHint {
            preset: name,
            hint,
            reason: reason.to_string(),
        })
    };
    let one = Rational::from_integer(1);
    use PresetName::*;
    match (name, hints.k, hints.m) {
        (Ofdm | Sefdm, _, Some(m)) if m != 1 => return bad("M", "this family has a single subsymbol"),
        (ScFde, Some(k), _) if k != 1 => return bad("K", "single-carrier FDE uses one subcarrier"),
        (ScFdm, Some(k), _) if k < 2 => return bad("K", "SC-FDM needs more than one subcarrier"),
        (BlockOfdm, _, Some(m)) if m < 2 => return bad("M", "block OFDM needs more than one subsymbol"),
        _ => {}
    }
    if hints.k == Some(0) || hints.m == Some(0) {
        return bad("K/M", "sizes must be positive");
    }
    let oqam = template(name).oqam;
    if oqam && hints.k.is_some_and(|k| k % 2 != 0) {
        return bad("K", "offset modulation needs an even number of subcarriers");
    }
    if matches!(name, FbmcOqam | FbmcFmt | Ftn) && hints.cp.is_some_and(|cp| cp > 0) {
        return bad("cp", "this family uses no cyclic prefix");
    }
    if hints.rolloff.is_some() && !matches!(name, Gfdm | FbmcOqam | FbmcFmt | FbmcCoqam | CbFmt) {
        return bad("rolloff", "the family's pulse has no roll-off");
    }
    if let Some(nu_t) = hints.nu_t {
        match name {
            Gfdm => {}
            Ftn if nu_t < one => {}
            Ftn => return bad("nu_t", "faster-than-Nyquist needs nu_t < 1"),
            _ if nu_t != one => return bad("nu_t", "time scaling is fixed to 1"),
            _ => {}
        }
    }
    if let Some(nu_f) = hints.nu_f {
        match name {
            Gfdm => {}
            Sefdm if nu_f < one => {}
            Sefdm => return bad("nu_f", "SEFDM needs nu_f < 1"),
            FbmcFmt | CbFmt if nu_f > one => {}
            FbmcFmt | CbFmt => return bad("nu_f", "FMT needs nu_f > 1"),
            _ if nu_f != one => return bad("nu_f", "frequency scaling is fixed to 1"),
            _ => {}
        }
    }
    if let Some(silent) = hints.silent_subsymbols {
        if silent > 0 && !matches!(name, Gfdm | FbmcOqam | FbmcFmt | Ftn) {
            return bad("silent_subsymbols", "this family has no silent subsymbols");
        }
    }
    Ok(())
}

fn integer(value: Rational) -> Option<usize> {
    value.is_integer().then(|| value.to_integer() as usize)
}

/// Build the configuration and table column for a family.
pub fn make_preset(
    name: PresetName,
    hints: &SizeHints,
) -> Result<(WaveformConfig, PresetDescriptor), PresetError> {
    check_hints(name, hints)?;
    let t = template(name);
    let k = hints.k.unwrap_or(t.k);
    let m = hints.m.unwrap_or(t.m);
    let nu_t = hints.nu_t.unwrap_or(t.nu_t);
    let nu_f = hints.nu_f.unwrap_or(t.nu_f);
    let (kr, mr) = (Rational::from_integer(k as u64), Rational::from_integer(m as u64));

    // R = K·ν_f, T = M·ν_t, P = K·ν_t·ν_f, Q = M·ν_t·ν_f.
    let lattice = (
        integer(kr * nu_f),
        integer(mr * nu_t),
        integer(kr * nu_t * nu_f),
    );
    let (Some(r), Some(tt), Some(p)) = lattice else {
        return Err(PresetError::IncompatibleHint {
            preset: name,
            hint: "K/M",
            reason: format!("K={k}, M={m} with nu_t={nu_t}, nu_f={nu_f} gives a non-integer lattice"),
        });
    };
    let pulse = match (t.pulse, hints.rolloff) {
        (PulseKind::RaisedCosine { .. }, Some(rolloff)) => PulseKind::RaisedCosine { rolloff },
        (PulseKind::RootRaisedCosine { .. }, Some(rolloff)) => PulseKind::RootRaisedCosine { rolloff },
        (kind, _) => kind,
    };
    let s = r * tt;
    let mut config = WaveformConfig::new(r, tt, p, 1)
        .with_pulse(pulse)
        .with_oqam(t.oqam)
        .with_cp(hints.cp.unwrap_or((t.cp)(k, s)))
        .with_silent_subsymbols(hints.silent_subsymbols.unwrap_or(if m > 2 { t.silent } else { 0 }));
    config.subcarrier_spacing = mr * nu_t * nu_f;

    validate_config(&config).map_err(|e| PresetError::IncompatibleHint {
        preset: name,
        hint: "sizes",
        reason: e.to_string(),
    })?;
    if t.oqam && p % 2 != 0 {
        return Err(PresetError::IncompatibleHint {
            preset: name,
            hint: "K",
            reason: format!("offset modulation needs an even subsymbol spacing, got {p}"),
        });
    }
    Ok((config, descriptor(name)))
}

/// Outcome of checking a preset against its table column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub name: PresetName,
    pub orthogonal: Claim,
    pub metrics: OrthogonalityMetrics,
    /// Noiseless matched-filter error for offset-modulated presets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oqam_round_trip_error: Option<f64>,
    /// Complex-domain Gram off-diagonal of the same pulse without offset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plain_gram_offdiag: Option<f64>,
    /// Orthogonality was measured but not asserted.
    pub recorded_only: bool,
}

/// Measure orthogonality and compare against the table.
pub fn verify_preset_claims(name: PresetName, hints: &SizeHints) -> Result<ClaimReport, Error> {
    let (config, desc) = make_preset(name, hints)?;
    let validated = validate_config(&config)?;
    let tr = Transceiver::new(&validated)?;
    let metrics = orthogonality_metrics(&tr.matrix()?);
    let violated = |claim: &'static str, detail: String| -> Error {
        PresetError::ClaimViolated {
            preset: name,
            claim,
            detail,
        }
        .into()
    };

    if desc.claims.cp != (config.cp_length > 0) {
        return Err(violated("cp", format!("cp_length = {}", config.cp_length)));
    }
    match (desc.claims.offset, config.oqam) {
        (Claim::Yes, false) | (Claim::No, true) => {
            return Err(violated("offset", format!("oqam = {}", config.oqam)));
        }
        _ => {}
    }

    let (oqam_round_trip_error, plain_gram_offdiag) = if config.oqam {
        let plain = modem::build_matrix(tr.pulse(), tr.grid())?;
        (
            Some(round_trip_error(&tr)?),
            Some(orthogonality_metrics(&plain).gram_max_offdiag),
        )
    } else {
        (None, None)
    };

    match desc.claims.orthogonal {
        Claim::Yes => {
            if metrics.gram_max_offdiag >= 1e-10 {
                return Err(violated(
                    "orthogonal",
                    format!("Gram off-diagonal {:e}", metrics.gram_max_offdiag),
                ));
            }
            if let (Some(err), Some(plain)) = (oqam_round_trip_error, plain_gram_offdiag) {
                if err >= 1e-9 || plain <= 1e-3 {
                    return Err(violated(
                        "offset",
                        format!("round trip {err:e}, plain Gram off-diagonal {plain:e}"),
                    ));
                }
            }
        }
        Claim::No => {
            if metrics.rank >= metrics.inputs && metrics.gram_max_offdiag <= 1e-3 {
                return Err(violated(
                    "orthogonal",
                    format!(
                        "rank {} of {}, Gram off-diagonal {:e}",
                        metrics.rank, metrics.inputs, metrics.gram_max_offdiag
                    ),
                ));
            }
        }
        Claim::Conditional => {}
    }
    Ok(ClaimReport {
        name,
        orthogonal: desc.claims.orthogonal,
        metrics,
        oqam_round_trip_error,
        plain_gram_offdiag,
        recorded_only: desc.claims.orthogonal == Claim::Conditional,
    })
}

fn round_trip_error(tr: &Transceiver) -> Result<f64, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a0a);
    let data = tr.random_data(Constellation::Qam16, &mut rng);
    let est = tr.receiver(Receiver::MatchedFilter)?.detect(&tr.transmit(&data)?)?;
    Ok(tr
        .active_positions()
        .into_iter()
        .map(|(k, m)| (est.get(k, m) - data.get(k, m)).norm())
        .fold(0.0, f64::max))
}

/// Validated configuration for a preset.
pub fn preset_config(name: PresetName, hints: &SizeHints) -> Result<ValidatedConfig, Error> {
    let (config, _) = make_preset(name, hints)?;
    Ok(validate_config(&config)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in PresetName::ALL {
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
            assert_eq!(p.label().parse::<PresetName>().unwrap(), p);
        }
        assert_eq!("FBMC_OQAM".parse::<PresetName>().unwrap(), PresetName::FbmcOqam);
        assert!("ufmc".parse::<PresetName>().is_err());
    }

    #[test]
    fn ofdm_preset_shape() {
        let (cfg, desc) = make_preset(PresetName::Ofdm, &SizeHints::default().k(64).cp(16)).unwrap();
        assert_eq!(
            (cfg.samples_per_period, cfg.periods, cfg.subsymbol_spacing),
            (64, 1, 64)
        );
        assert_eq!(cfg.subcarrier_spacing, Rational::from_integer(1));
        assert_eq!(cfg.pulse_kind, PulseKind::Rect);
        assert_eq!(cfg.cp_length, 16);
        assert_eq!(desc.claims.orthogonal, Claim::Yes);
    }

    #[test]
    fn sc_fde_preset_shape() {
        let (cfg, desc) = make_preset(PresetName::ScFde, &SizeHints::default().m(64)).unwrap();
        let g = *validate_config(&cfg).unwrap().grid();
        assert_eq!((g.k, g.m), (1, 64));
        assert_eq!(cfg.pulse_kind, PulseKind::Dirichlet);
        assert_eq!(desc.scenario_tag, "IoT/MTC");
        assert_eq!(desc.feature, "low PAPR");
    }

    #[test]
    fn sefdm_three_quarters() {
        let (cfg, desc) =
            make_preset(PresetName::Sefdm, &SizeHints::default().k(16).nu_f(Rational::new(3, 4))).unwrap();
        let g = *validate_config(&cfg).unwrap().grid();
        assert_eq!((g.k, g.m, g.s), (16, 1, 12));
        assert_eq!(cfg.pulse_kind, PulseKind::Rect);
        assert_eq!(desc.claims.orthogonal, Claim::No);
    }

    #[test]
    fn incompatible_hints() {
        let cases = [
            (PresetName::Ofdm, SizeHints::default().m(4)),
            (PresetName::Sefdm, SizeHints::default().m(2)),
            (PresetName::ScFde, SizeHints::default().k(4)),
            (PresetName::ScFdm, SizeHints::default().k(1)),
            (PresetName::FbmcOqam, SizeHints::default().cp(4)),
            (PresetName::Ftn, SizeHints::default().nu_t(Rational::from_integer(1))),
            (PresetName::Sefdm, SizeHints::default().nu_f(Rational::new(3, 2))),
            (PresetName::Ofdm, SizeHints::default().rolloff(0.2)),
            (PresetName::Ftn, SizeHints::default().k(12)),
        ];
        for (name, hints) in cases {
            let e = make_preset(name, &hints).unwrap_err();
            assert_eq!(e.code(), "presets.incompatible_hint", "{name} {hints:?}");
        }
    }

    #[test]
    fn every_default_validates() {
        for p in PresetName::ALL {
            let (cfg, _) = make_preset(p, &SizeHints::default()).unwrap();
            let g = *validate_config(&cfg).unwrap().grid();
            assert!(g.k <= 128, "{p}");
        }
    }
}
