use num_complex::Complex64;
use serde::Serialize;

use super::AnalysisError;
use crate::dsp;
use crate::params::GridParams;
use crate::pulses::PrototypePulse;

/// Inner products `⟨g, g shifted by h·P/2 samples and k·Q bins⟩` on the
/// half-subsymbol grid, `h ∈ −2M..=2M`, `k ∈ −K/2..=K/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguitySurface {
    values: Vec<Complex64>,
    max_half_step: i64,
    max_subcarrier: i64,
    pub half_spaced: bool,
}

impl AmbiguitySurface {
    pub fn max_half_step(&self) -> i64 {
        self.max_half_step
    }

    pub fn max_subcarrier(&self) -> i64 {
        self.max_subcarrier
    }

    /// `None` outside the computed range.
    pub fn get(&self, h: i64, k: i64) -> Option<Complex64> {
        if h.abs() > self.max_half_step || k.abs() > self.max_subcarrier {
            return None;
        }
        let cols = 2 * self.max_subcarrier + 1;
        let row = h + self.max_half_step;
        let col = k + self.max_subcarrier;
        Some(self.values[(row * cols + col) as usize])
    }

    /// `(h, k, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let (hm, km) = (self.max_half_step, self.max_subcarrier);
        (-hm..=hm)
            .flat_map(move |h| (-km..=km).map(move |k| (h, k)))
            .zip(&self.values)
            .map(|((h, k), v)| (h, k, *v))
    }
}

pub fn ambiguity(pulse: &PrototypePulse, grid: &GridParams) -> Result<AmbiguitySurface, AnalysisError> {
    let p = grid.subsymbol_spacing;
    if !p.is_multiple_of(2) {
        return Err(AnalysisError::OddP { p });
    }
    let s = grid.s;
    if pulse.len() != s {
        return Err(AnalysisError::PulseLengthMismatch {
            expected: s,
            got: pulse.len(),
        });
    }
    let g = pulse.samples();
    let half = (p / 2) as i64;
    let max_half_step = 2 * grid.m as i64;
    let max_subcarrier = (grid.k / 2) as i64;
    let (q_num, q_den) = (
        *grid.subcarrier_spacing.numer() as i128,
        *grid.subcarrier_spacing.denom() as i128,
    );

    let mut values = Vec::with_capacity(((2 * max_half_step + 1) * (2 * max_subcarrier + 1)) as usize);
    for h in -max_half_step..=max_half_step {
        let shifted = dsp::circular_delay(g, h * half);
        let c: Vec<Complex64> = g.iter().zip(&shifted).map(|(a, b)| a.conj() * b).collect();
        if q_den == 1 {
            // S·IDFT evaluates every integer frequency shift at once.
            let spec = dsp::ifft(&c);
            for k in -max_subcarrier..=max_subcarrier {
                let bin = (k as i128 * q_num).rem_euclid(s as i128) as usize;
                values.push(spec[bin] * s as f64);
            }
        } else {
            for k in -max_subcarrier..=max_subcarrier {
                values.push(
                    c.iter()
                        .enumerate()
                        .map(|(n, v)| v * dsp::unit_phasor(k as i128 * q_num * n as i128, q_den * s as i128))
                        .sum(),
                );
            }
        }
    }
    Ok(AmbiguitySurface {
        values,
        max_half_step,
        max_subcarrier,
        half_spaced: true,
    })
}
