use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::channel::ChannelError;
use crate::framing::FramingError;
use crate::io::IoError;
use crate::modem::ModemError;
use crate::params::{ConfigParseError, ValidationError};
use crate::presets::PresetError;
use crate::pulses::PulseError;

/// Crate-wide error wrapping each module's error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ValidationError),
    #[error(transparent)]
    ConfigParse(#[from] ConfigParseError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Preset(#[from] PresetError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl Error {
    /// Module-qualified error code, e.g. `modem.rank_deficient`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "params.invalid_config",
            Error::ConfigParse(_) => "params.parse",
            Error::Pulse(e) => pulse_code(e),
            Error::Modem(e) => match e {
                ModemError::DimensionMismatch { .. } => "modem.dimension_mismatch",
                ModemError::RankDeficient { .. } => "modem.rank_deficient",
                ModemError::OddP { .. } => "modem.odd_p",
                ModemError::PulseNotRootNyquist { .. } => "modem.pulse_not_root_nyquist",
                ModemError::WrongMatrixDomain { .. } => "modem.wrong_matrix_domain",
                ModemError::InvalidNoiseVariance(_) => "modem.invalid_noise_variance",
                ModemError::Pulse(p) => pulse_code(p),
            },
            Error::Framing(e) => match e {
                FramingError::CpTooLong { .. } => "framing.cp_too_long",
                FramingError::RampTooLong { .. } => "framing.ramp_too_long",
                FramingError::LengthMismatch { .. } => "framing.length_mismatch",
                FramingError::SilentSubsymbolsOutOfRange { .. } => {
                    "framing.silent_subsymbols_out_of_range"
                }
            },
            Error::Channel(e) => match e {
                ChannelError::EmptyTaps => "channel.empty_taps",
                ChannelError::ZeroEnergyTaps => "channel.zero_energy_taps",
                ChannelError::ZeroBin { .. } => "channel.zero_bin",
                ChannelError::TooManyTaps { .. } => "channel.too_many_taps",
                ChannelError::InvalidNoiseVariance(_) => "channel.invalid_noise_variance",
            },
            Error::Analysis(e) => e.code(),
            Error::Preset(e) => e.code(),
            Error::Io(e) => e.code(),
        }
    }

    /// Input or configuration problem, as opposed to a runtime failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_) | Error::ConfigParse(_) => true,
            Error::Preset(e) => e.is_validation(),
            Error::Io(e) => e.is_validation(),
            Error::Framing(FramingError::CpTooLong { .. } | FramingError::RampTooLong { .. }) => {
                true
            }
            _ => false,
        }
    }
}

fn pulse_code(e: &PulseError) -> &'static str {
    match e {
        PulseError::UnsupportedKindForGrid { .. } => "pulses.unsupported_kind_for_grid",
        PulseError::IndexOutOfGrid { .. } => "pulses.index_out_of_grid",
        PulseError::LengthMismatch { .. } => "pulses.length_mismatch",
        PulseError::ZeroEnergy => "pulses.zero_energy",
    }
}
