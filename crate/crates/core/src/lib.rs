//! Circular filtered multicarrier waveform engine.
//!
//! One parameterized block modem (GFDM) reproduces OFDM, block OFDM, SC-FDE,
//! SC-FDM, the FBMC family, CB-FMT, FTN and SEFDM as configurations. The
//! crate covers configuration and grid derivation ([`params`]), prototype
//! pulses ([`pulses`]), synthesis and detection ([`modem`]), block framing
//! ([`framing`]), simple channels with frequency-domain equalization
//! ([`channel`]), analysis ([`analysis`]), the waveform presets ([`presets`])
//! and file formats ([`io`]).

pub mod analysis;
pub mod channel;
pub mod dsp;
pub mod error;
pub mod framing;
pub mod io;
pub mod link;
pub mod modem;
pub mod params;
pub mod presets;
pub mod pulses;

pub use error::Error;
pub use link::Transceiver;
pub use modem::{BlockSignal, ModMatrix, Modem, RealGrid, Receiver, ResourceGrid};
pub use params::{validate_config, GridParams, PulseKind, ValidatedConfig, WaveformConfig};
pub use pulses::{make_pulse, PrototypePulse};

pub use num_complex::Complex64;
