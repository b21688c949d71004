//! Ambiguity surfaces, spectra, PAPR, orthogonality metrics, Monte-Carlo
//! SER and multi-user leakage.

mod ambiguity;
mod guard;
mod orthogonality;
mod papr;
mod ser;
mod spectrum;

pub use ambiguity::{ambiguity, AmbiguitySurface};
pub use guard::{guard_band_leakage, leakage_between, GuardBandReport, LEAKAGE_FLOOR_DB};
pub use orthogonality::{orthogonality_metrics, OrthogonalityMetrics};
pub use papr::{ccdf, papr, percentile, CcdfPoint};
pub use ser::{run_ser, wilson_interval, ChannelProfile, ReceiverKind, SerPoint, SerReport};
pub use spectrum::{allocation_band, oob_power, psd, Psd, OOB_FLOOR_DB};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("half-subsymbol steps need an even subsymbol spacing, got P = {p}")]
    OddP { p: usize },
    #[error("pulse has {got} samples, grid needs {expected}")]
    PulseLengthMismatch { expected: usize, got: usize },
    #[error("stream of {len} samples is shorter than one {segment}-sample segment")]
    TooShort { len: usize, segment: usize },
    #[error("segment length {segment} with overlap {overlap} is not usable")]
    InvalidSegment { segment: usize, overlap: usize },
    #[error("block size {block} does not divide {len} samples")]
    BlockSizeMismatch { block: usize, len: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("in-band region is empty")]
    EmptyBand,
    #[error("allocations overlap or leave no room: {detail}")]
    OverlappingAllocations { detail: String },
    #[error("users must share the block length and subcarrier spacing")]
    IncompatibleUsers,
}

impl AnalysisError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::OddP { .. } => "analysis.odd_p",
            AnalysisError::PulseLengthMismatch { .. } => "analysis.pulse_length_mismatch",
            AnalysisError::TooShort { .. } => "analysis.too_short",
            AnalysisError::InvalidSegment { .. } => "analysis.invalid_segment",
            AnalysisError::BlockSizeMismatch { .. } => "analysis.block_size_mismatch",
            AnalysisError::NoTrials => "analysis.no_trials",
            AnalysisError::EmptyBand => "analysis.empty_band",
            AnalysisError::OverlappingAllocations { .. } => "analysis.overlapping_allocations",
            AnalysisError::IncompatibleUsers => "analysis.incompatible_users",
        }
    }
}

/// Collected metrics for one signal or configuration. Absent entries were
/// not requested.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MetricReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub papr_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ccdf: Option<Vec<CcdfPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd: Option<Psd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oob_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram_max_offdiag: Option<f64>,
    /// `None` in JSON when infinite.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

impl MetricReport {
    pub fn with_orthogonality(mut self, m: &OrthogonalityMetrics) -> Self {
        self.gram_max_offdiag = Some(m.gram_max_offdiag);
        self.condition_number = m.condition_number.is_finite().then_some(m.condition_number);
        self.rank = Some(m.rank);
        self
    }
}
