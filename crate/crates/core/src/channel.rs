//! AWGN and static multipath channels, and one-tap frequency-domain
//! equalization.
//!
//! SNR is per received sample, relative to the mean power of the framed
//! transmit signal (prefix included).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp;
use crate::framing::FramedBlock;
use crate::modem::BlockSignal;

/// Bins with `|H| < ZERO_BIN_THRESHOLD` cannot be zero-forced.
pub const ZERO_BIN_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("channel needs at least one tap")]
    EmptyTaps,
    #[error("channel taps have zero energy")]
    ZeroEnergyTaps,
    #[error("channel response vanishes at bin {bin} (|H| = {magnitude:e})")]
    ZeroBin { bin: usize, magnitude: f64 },
    #[error("{taps} taps cannot be resolved in a {s}-sample block")]
    TooManyTaps { taps: usize, s: usize },
    #[error("noise variance {0} must be finite and non-negative")]
    InvalidNoiseVariance(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelKind {
    Awgn { snr_db: f64 },
    Multipath {
        taps: Vec<Complex64>,
        snr_db: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    kind: ChannelKind,
    rng_seed: u64,
}

impl ChannelModel {
    pub fn awgn(snr_db: f64, rng_seed: u64) -> Self {
        ChannelModel {
            kind: ChannelKind::Awgn { snr_db },
            rng_seed,
        }
    }

    /// Taps are normalized to unit energy.
    pub fn multipath(
        taps: Vec<Complex64>,
        snr_db: Option<f64>,
        rng_seed: u64,
    ) -> Result<Self, ChannelError> {
        if taps.is_empty() {
            return Err(ChannelError::EmptyTaps);
        }
        let e = dsp::energy(&taps);
        if !(e > 0.0 && e.is_finite()) {
            return Err(ChannelError::ZeroEnergyTaps);
        }
        let scale = 1.0 / e.sqrt();
        Ok(ChannelModel {
            kind: ChannelKind::Multipath {
                taps: taps.into_iter().map(|t| t * scale).collect(),
                snr_db,
            },
            rng_seed,
        })
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        ChannelModel {
            kind: self.kind.clone(),
            rng_seed,
        }
    }

    pub fn taps(&self) -> &[Complex64] {
        match &self.kind {
            ChannelKind::Awgn { .. } => std::slice::from_ref(&UNIT_TAP),
            ChannelKind::Multipath { taps, .. } => taps,
        }
    }

    pub fn snr_db(&self) -> Option<f64> {
        match &self.kind {
            ChannelKind::Awgn { snr_db } => Some(*snr_db),
            ChannelKind::Multipath { snr_db, .. } => *snr_db,
        }
    }
}

const UNIT_TAP: Complex64 = Complex64::new(1.0, 0.0);

/// Channel output with the noise level that was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub frame: FramedBlock,
    /// Complex noise variance per sample; zero when noiseless.
    pub noise_variance: f64,
    /// Channel memory exceeds the prefix; FDE will not be exact.
    pub taps_exceed_cp: bool,
}

/// Complex Gaussian noise of the given variance.
pub fn complex_noise(len: usize, variance: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let sigma = (variance / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * sigma, im * sigma)
        })
        .collect()
}

/// Convolve with the taps (truncated at the frame end), then add noise.
pub fn apply_channel(frame: &FramedBlock, ch: &ChannelModel) -> ReceivedFrame {
    let taps = ch.taps();
    let x = &frame.samples;
    let signal_power = dsp::mean_power(x);
    let mut y: Vec<Complex64> = (0..x.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .take(n + 1)
                .map(|(l, h)| h * x[n - l])
                .sum()
        })
        .collect();

    let noise_variance = match ch.snr_db() {
        Some(snr) if snr.is_finite() => signal_power / 10f64.powf(snr / 10.0),
        _ => 0.0,
    };
    if noise_variance > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(ch.seed());
        let noise = complex_noise(y.len(), noise_variance, &mut rng);
        y.iter_mut().zip(noise).for_each(|(a, b)| *a += b);
    }
    ReceivedFrame {
        frame: FramedBlock {
            samples: y,
            ..frame.clone()
        },
        noise_variance,
        taps_exceed_cp: taps.len() > frame.cp_length + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Equalizer {
    ZeroForcing,
    /// `noise_var` relative to the per-sample signal power.
    Mmse { noise_var: f64 },
}

/// `S`-point response of the zero-padded taps.
pub fn channel_response(taps: &[Complex64], s: usize) -> Result<Vec<Complex64>, ChannelError> {
    if taps.is_empty() {
        return Err(ChannelError::EmptyTaps);
    }
    if taps.len() > s {
        return Err(ChannelError::TooManyTaps { taps: taps.len(), s });
    }
    let mut padded = vec![Complex64::new(0.0, 0.0); s];
    padded[..taps.len()].copy_from_slice(taps);
    Ok(dsp::fft(&padded))
}

/// Per-bin one-tap equalization of a prefix-free block.
pub fn fde_equalize(
    x: &BlockSignal,
    taps: &[Complex64],
    method: Equalizer,
) -> Result<BlockSignal, ChannelError> {
    let h = channel_response(taps, x.len())?;
    let mut spec = dsp::fft(&x.samples);
    match method {
        Equalizer::ZeroForcing => {
            for (bin, (v, hq)) in spec.iter_mut().zip(&h).enumerate() {
                let magnitude = hq.norm();
                if magnitude < ZERO_BIN_THRESHOLD {
                    return Err(ChannelError::ZeroBin { bin, magnitude });
                }
                *v /= hq;
            }
        }
        Equalizer::Mmse { noise_var } => {
            if !(noise_var.is_finite() && noise_var >= 0.0) {
                return Err(ChannelError::InvalidNoiseVariance(noise_var));
            }
            for (bin, (v, hq)) in spec.iter_mut().zip(&h).enumerate() {
                let denom = hq.norm_sqr() + noise_var;
                if denom == 0.0 {
                    return Err(ChannelError::ZeroBin { bin, magnitude: 0.0 });
                }
                *v *= hq.conj() / denom;
            }
        }
    }
    Ok(BlockSignal::new(dsp::ifft(&spec)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::{add_cp, remove_cp};
    use rand::Rng;

    fn signal(s: usize, seed: u64) -> BlockSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BlockSignal::new(
            (0..s)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_tap_noiseless_is_identity() {
        let f = add_cp(&signal(16, 1), 4, 0).unwrap();
        let ch = ChannelModel::multipath(vec![c(1.0, 0.0)], None, 0).unwrap();
        let rx = apply_channel(&f, &ch);
        assert_eq!(rx.frame.samples, f.samples);
        assert_eq!(rx.noise_variance, 0.0);
        let awgn = ChannelModel::awgn(f64::INFINITY, 0);
        assert_eq!(apply_channel(&f, &awgn).frame.samples, f.samples);
    }

    #[test]
    fn two_tap_definition() {
        let f = add_cp(&signal(16, 2), 2, 0).unwrap();
        let ch = ChannelModel::multipath(vec![c(0.6, 0.0), c(0.0, 0.8)], None, 0).unwrap();
        let h = ch.taps().to_vec();
        let y = apply_channel(&f, &ch).frame.samples;
        assert!((y[0] - h[0] * f.samples[0]).norm() < 1e-15);
        for (n, v) in y.iter().enumerate().skip(1) {
            let want = h[0] * f.samples[n] + h[1] * f.samples[n - 1];
            assert!((v - want).norm() < 1e-15);
        }
    }

    #[test]
    fn taps_are_normalized() {
        let ch = ChannelModel::multipath(vec![c(3.0, 0.0), c(0.0, 4.0)], None, 0).unwrap();
        assert!((dsp::energy(ch.taps()) - 1.0).abs() < 1e-15);
        assert_eq!(ChannelModel::multipath(vec![], None, 0), Err(ChannelError::EmptyTaps));
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let f = add_cp(&signal(64, 3), 8, 0).unwrap();
        let ch = ChannelModel::awgn(5.0, 42);
        let a = apply_channel(&f, &ch);
        let b = apply_channel(&f, &ch);
        assert_eq!(a, b);
        assert_ne!(apply_channel(&f, &ch.with_seed(43)).frame.samples, a.frame.samples);
    }

    #[test]
    fn noise_power_calibration() {
        let n = 1_000_000;
        let x = BlockSignal::new(vec![c(1.0, 0.0); n]);
        let frame = add_cp(&x, 0, 0).unwrap();
        let snr_db = 7.0;
        let rx = apply_channel(&frame, &ChannelModel::awgn(snr_db, 9));
        let noise: Vec<Complex64> = rx
            .frame
            .samples
            .iter()
            .map(|v| v - c(1.0, 0.0))
            .collect();
        let measured = dsp::mean_power(&noise);
        let expected = 10f64.powf(-snr_db / 10.0);
        assert!((measured / expected - 1.0).abs() < 0.01, "{measured} vs {expected}");
    }

    #[test]
    fn taps_longer_than_prefix_are_flagged() {
        let f = add_cp(&signal(16, 4), 1, 0).unwrap();
        let ch = ChannelModel::multipath(vec![c(1.0, 0.0); 3], None, 0).unwrap();
        assert!(apply_channel(&f, &ch).taps_exceed_cp);
    }

    #[test]
    fn fde_identity_and_recovery() {
        let x = signal(32, 5);
        let y = fde_equalize(&x, &[c(1.0, 0.0)], Equalizer::ZeroForcing).unwrap();
        assert!(dsp::max_abs_diff(&y.samples, &x.samples) < 1e-14);

        let ch = ChannelModel::multipath(
            vec![c(0.9, 0.1), c(0.3, -0.2), c(0.0, 0.25), c(-0.1, 0.05)],
            None,
            0,
        )
        .unwrap();
        let rx = apply_channel(&add_cp(&x, 3, 0).unwrap(), &ch);
        let body = remove_cp(&rx.frame, 32).unwrap();
        let eq = fde_equalize(&body, ch.taps(), Equalizer::ZeroForcing).unwrap();
        assert!(dsp::max_abs_diff(&eq.samples, &x.samples) < 1e-9);
    }

    #[test]
    fn mmse_converges_to_zf() {
        let x = signal(32, 6);
        let taps = [c(0.8, 0.0), c(0.5, 0.3)];
        let zf = fde_equalize(&x, &taps, Equalizer::ZeroForcing).unwrap();
        let mmse = fde_equalize(&x, &taps, Equalizer::Mmse { noise_var: 1e-12 }).unwrap();
        assert!(dsp::max_abs_diff(&zf.samples, &mmse.samples) < 1e-8);
    }

    #[test]
    fn spectral_null_reports_bin() {
        // 1 - z^-1 vanishes at DC.
        let x = signal(8, 7);
        match fde_equalize(&x, &[c(1.0, 0.0), c(-1.0, 0.0)], Equalizer::ZeroForcing) {
            Err(ChannelError::ZeroBin { bin, .. }) => assert_eq!(bin, 0),
            other => panic!("{other:?}"),
        }
    }
}
