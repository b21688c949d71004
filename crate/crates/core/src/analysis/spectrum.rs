use num_complex::Complex64;
use serde::Serialize;

use super::AnalysisError;
use crate::dsp;
use crate::params::GridParams;

/// Ratios below this are reported as this value.
pub const OOB_FLOOR_DB: f64 = -300.0;

/// Averaged periodogram on normalized frequencies `[-0.5, 0.5)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    /// Power per bin; the mean over bins is the signal power.
    pub density: Vec<f64>,
    pub segments: usize,
}

impl Psd {
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() / self.density.len() as f64
    }
}

fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos()))
        .collect()
}

/// Welch estimate with Hann-windowed segments.
pub fn psd(x: &[Complex64], segment: usize, overlap: usize) -> Result<Psd, AnalysisError> {
    if segment < 2 || overlap >= segment {
        return Err(AnalysisError::InvalidSegment { segment, overlap });
    }
    if x.len() < segment {
        return Err(AnalysisError::TooShort {
            len: x.len(),
            segment,
        });
    }
    let w = hann(segment);
    let w_energy: f64 = w.iter().map(|v| v * v).sum();
    let step = segment - overlap;
    let mut acc = vec![0.0; segment];
    let mut segments = 0;
    let mut start = 0;
    while start + segment <= x.len() {
        let windowed: Vec<Complex64> = x[start..start + segment]
            .iter()
            .zip(&w)
            .map(|(v, wn)| v * wn)
            .collect();
        for (a, v) in acc.iter_mut().zip(dsp::fft(&windowed)) {
            *a += v.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let scale = 1.0 / (w_energy * segments as f64);
    // Reorder to ascending frequency.
    let half = segment - segment / 2;
    let order: Vec<usize> = (half..segment).chain(0..half).collect();
    Ok(Psd {
        frequencies: order
            .iter()
            .map(|&i| dsp::centered_bin(i, segment) as f64 / segment as f64)
            .collect(),
        density: order.iter().map(|&i| acc[i] * scale).collect(),
        segments,
    })
}

/// Normalized band covered by subcarriers `k_lo..=k_hi` (signed, centered
/// indices) widened by half a subcarrier spacing on each side.
pub fn allocation_band(grid: &GridParams, k_lo: i64, k_hi: i64) -> (f64, f64) {
    let q = grid.subcarrier_spacing;
    let q = *q.numer() as f64 / *q.denom() as f64;
    let s = grid.s as f64;
    ((k_lo as f64 * q - q / 2.0) / s, (k_hi as f64 * q + q / 2.0) / s)
}

/// `10·log10(mean out-of-band / mean in-band)` for the band `[lo, hi]`.
pub fn oob_power(psd: &Psd, band: (f64, f64)) -> Result<f64, AnalysisError> {
    let (mut inside, mut n_in, mut outside, mut n_out) = (0.0, 0usize, 0.0, 0usize);
    for (f, p) in psd.frequencies.iter().zip(&psd.density) {
        if (band.0..=band.1).contains(f) {
            inside += p;
            n_in += 1;
        } else {
            outside += p;
            n_out += 1;
        }
    }
    if n_in == 0 || inside <= 0.0 {
        return Err(AnalysisError::EmptyBand);
    }
    if n_out == 0 {
        return Ok(OOB_FLOOR_DB);
    }
    let ratio = (outside / n_out as f64) / (inside / n_in as f64);
    Ok((10.0 * ratio.log10()).max(OOB_FLOOR_DB))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noise(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        crate::channel::complex_noise(len, 1.0, &mut rng)
    }

    #[test]
    fn tone_has_one_dominant_bin() {
        let x: Vec<Complex64> = (0..4096)
            .map(|n| dsp::unit_phasor(n as i128 * 8, 64))
            .collect();
        let p = psd(&x, 64, 32).unwrap();
        let peak = p
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((p.frequencies[peak] - 0.125).abs() < 1e-12);
        assert!((p.total_power() - 1.0).abs() < 0.01);
        // A tone well inside the band has negligible leakage far away.
        assert!(oob_power(&p, (0.05, 0.2)).unwrap() < -100.0);
    }

    #[test]
    fn white_noise_is_flat() {
        let x = noise(1 << 20, 4);
        let p = psd(&x, 64, 32).unwrap();
        assert!((dsp::mean_power(&x) - p.total_power()).abs() / dsp::mean_power(&x) < 0.01);
        for d in &p.density {
            assert!((10.0 * d.log10()).abs() < 1.0, "{d}");
        }
        assert!(oob_power(&p, (-0.25, 0.25)).unwrap().abs() < 0.5);
    }

    #[test]
    fn everything_inband_hits_floor() {
        let p = psd(&noise(256, 1), 64, 32).unwrap();
        assert_eq!(oob_power(&p, (-1.0, 1.0)).unwrap(), OOB_FLOOR_DB);
    }

    #[test]
    fn short_stream_rejected() {
        assert_eq!(
            psd(&noise(10, 1), 64, 32).unwrap_err(),
            AnalysisError::TooShort { len: 10, segment: 64 }
        );
    }
}
