//! Unit-energy prototype pulses and their circular time-frequency shifts.
//!
//! Raised cosine, root raised cosine and Dirichlet pulses are defined by
//! sampling their spectrum on the `S`-point DFT grid, so circular shifts of
//! them stay exact. Spectral widths are measured in units of `M` bins, the
//! Nyquist bandwidth for a time step of `P = S/M` samples.

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsp;
use crate::params::{GridParams, PulseKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("{kind} pulse spans {needed} bins but the block only has {available}")]
    UnsupportedKindForGrid {
        kind: &'static str,
        needed: f64,
        available: usize,
    },
    #[error("position (k={k}, m={m}) outside the {kk}x{mm} grid")]
    IndexOutOfGrid {
        k: usize,
        m: usize,
        kk: usize,
        mm: usize,
    },
    #[error("pulse has {got} samples, grid needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("pulse has zero energy")]
    ZeroEnergy,
}

/// Conditions under which a pulse is built but should not be trusted blindly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseWarning {
    /// Dirichlet with `M = 1` is a single DC bin: a constant over the block.
    DegenerateDirichlet,
    /// The Gaussian is a stand-in for the IOTA pulse, not IOTA itself.
    IotaApproximation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrototypePulse {
    samples: Vec<Complex64>,
    kind: Option<PulseKind>,
    fingerprint: String,
    warnings: Vec<PulseWarning>,
}

impl PrototypePulse {
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `None` for pulses loaded from samples.
    pub fn kind(&self) -> Option<PulseKind> {
        self.kind
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn warnings(&self) -> &[PulseWarning] {
        &self.warnings
    }

    /// Unitary DFT of the pulse.
    pub fn spectrum(&self) -> Vec<Complex64> {
        dsp::unitary_fft(&self.samples)
    }

    /// Wrap user-provided samples, normalizing them to unit energy.
    pub fn custom(samples: Vec<Complex64>, grid: &GridParams) -> Result<Self, PulseError> {
        if samples.len() != grid.s {
            return Err(PulseError::LengthMismatch {
                expected: grid.s,
                got: samples.len(),
            });
        }
        let samples = normalize(samples)?;
        let mut hasher = Sha256::new();
        for v in &samples {
            hasher.update(v.re.to_le_bytes());
            hasher.update(v.im.to_le_bytes());
        }
        Ok(PrototypePulse {
            samples,
            kind: None,
            fingerprint: hex::encode(&hasher.finalize()[..8]),
            warnings: Vec::new(),
        })
    }
}

fn normalize(mut samples: Vec<Complex64>) -> Result<Vec<Complex64>, PulseError> {
    let energy = dsp::energy(&samples);
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(PulseError::ZeroEnergy);
    }
    let scale = 1.0 / energy.sqrt();
    samples.iter_mut().for_each(|v| *v *= scale);
    Ok(samples)
}

/// Raised-cosine spectral amplitude at frequency `f` in units of the
/// Nyquist bandwidth.
fn raised_cosine_response(f: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    if rolloff == 0.0 {
        return match f.partial_cmp(&0.5) {
            Some(std::cmp::Ordering::Less) => 1.0,
            Some(std::cmp::Ordering::Equal) => 0.5,
            _ => 0.0,
        };
    }
    let lo = (1.0 - rolloff) / 2.0;
    let hi = (1.0 + rolloff) / 2.0;
    if f <= lo {
        1.0
    } else if f < hi {
        0.5 * (1.0 + (std::f64::consts::PI / rolloff * (f - lo)).cos())
    } else {
        0.0
    }
}

fn from_spectrum(spectrum: Vec<Complex64>) -> Vec<Complex64> {
    dsp::ifft(&spectrum)
}

/// Build the `S`-sample unit-energy prototype for `kind`.
pub fn make_pulse(kind: PulseKind, grid: &GridParams) -> Result<PrototypePulse, PulseError> {
    let s = grid.s;
    let m = grid.m;
    let mut warnings = Vec::new();

    let raw: Vec<Complex64> = match kind {
        PulseKind::Rect => (0..s)
            .map(|n| {
                if n < grid.samples_per_period {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
        PulseKind::Dirichlet => {
            if m == 1 {
                warnings.push(PulseWarning::DegenerateDirichlet);
            }
            // Bins -⌊M/2⌋ ..= ⌈M/2⌉-1, lower edge wins on even M.
            let lo = -((m / 2) as i64);
            let hi = (m - m / 2) as i64;
            let spectrum = (0..s)
                .map(|q| {
                    let inside = (lo..hi).contains(&dsp::centered_bin(q, s));
                    Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
                })
                .collect();
            from_spectrum(spectrum)
        }
        PulseKind::RaisedCosine { rolloff } | PulseKind::RootRaisedCosine { rolloff } => {
            let needed = (1.0 + rolloff) * m as f64;
            if needed > s as f64 {
                return Err(PulseError::UnsupportedKindForGrid {
                    kind: kind.label(),
                    needed,
                    available: s,
                });
            }
            let root = matches!(kind, PulseKind::RootRaisedCosine { .. });
            let spectrum = (0..s)
                .map(|q| {
                    let f = dsp::centered_bin(q, s) as f64 / m as f64;
                    let h = raised_cosine_response(f, rolloff);
                    Complex64::new(if root { h.sqrt() } else { h }, 0.0)
                })
                .collect();
            from_spectrum(spectrum)
        }
        PulseKind::GaussianIota { spread } => {
            warnings.push(PulseWarning::IotaApproximation);
            let width = spread * grid.samples_per_period as f64;
            let wraps = (6.0 * width / s as f64).ceil() as i64 + 1;
            (0..s)
                .map(|n| {
                    let v: f64 = (-wraps..=wraps)
                        .map(|l| {
                            let d = (n as i64 - l * s as i64) as f64 / width;
                            (-std::f64::consts::PI * d * d).exp()
                        })
                        .sum();
                    Complex64::new(v, 0.0)
                })
                .collect()
        }
    };

    let samples = normalize(raw)?;
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(&kind).expect("pulse kind serializes"));
    hasher.update(serde_json::to_vec(grid).expect("grid serializes"));
    Ok(PrototypePulse {
        samples,
        kind: Some(kind),
        fingerprint: hex::encode(&hasher.finalize()[..8]),
        warnings,
    })
}

/// Circular time shift by `delay` samples followed by a frequency shift of
/// `shift_num/shift_den` bins: `y[n] = x[(n-delay) mod S]·e^{j2π·shift·n/S}`.
pub fn time_frequency_shift(
    x: &[Complex64],
    delay: i64,
    shift_num: i128,
    shift_den: i128,
) -> Vec<Complex64> {
    let s = x.len() as i128;
    dsp::circular_delay(x, delay)
        .into_iter()
        .enumerate()
        .map(|(n, v)| v * dsp::unit_phasor(shift_num * n as i128, shift_den * s))
        .collect()
}

/// `g_{k,m}[n] = g[(n - mP) mod S]·e^{j2π·kQ·n/S}`.
pub fn shift_pulse(
    g: &PrototypePulse,
    m: usize,
    k: usize,
    grid: &GridParams,
) -> Result<Vec<Complex64>, PulseError> {
    if k >= grid.k || m >= grid.m {
        return Err(PulseError::IndexOutOfGrid {
            k,
            m,
            kk: grid.k,
            mm: grid.m,
        });
    }
    if g.len() != grid.s {
        return Err(PulseError::LengthMismatch {
            expected: grid.s,
            got: g.len(),
        });
    }
    let q = grid.subcarrier_spacing;
    Ok(time_frequency_shift(
        g.samples(),
        (m * grid.subsymbol_spacing) as i64,
        k as i128 * *q.numer() as i128,
        *q.denom() as i128,
    ))
}
