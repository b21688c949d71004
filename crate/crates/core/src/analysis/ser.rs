use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::channel::{self, ChannelModel, Equalizer};
use crate::error::Error;
use crate::framing;
use crate::link::{Constellation, Transceiver};
use crate::modem::Receiver;
use crate::params::ValidatedConfig;

/// Receiver family; MMSE takes its noise level from the SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverKind {
    Mf,
    Zf,
    Mmse,
}

impl ReceiverKind {
    pub fn receiver(self, noise_variance: f64) -> Receiver {
        match self {
            ReceiverKind::Mf => Receiver::MatchedFilter,
            ReceiverKind::Zf => Receiver::ZeroForcing,
            ReceiverKind::Mmse => Receiver::Mmse { noise_variance },
        }
    }
}

impl FromStr for ReceiverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mf" | "matched_filter" => Ok(ReceiverKind::Mf),
            "zf" | "zero_forcing" => Ok(ReceiverKind::Zf),
            "mmse" => Ok(ReceiverKind::Mmse),
            other => Err(format!("unknown receiver {other:?}, expected mf, zf or mmse")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelProfile {
    Awgn,
    /// Static taps, normalized to unit energy before use.
    Multipath { taps: Vec<Complex64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerPoint {
    pub snr_db: f64,
    pub symbols: u64,
    pub errors: u64,
    pub ser: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerReport {
    pub config_fingerprint: String,
    pub channel: ChannelProfile,
    pub receiver: ReceiverKind,
    pub constellation: Constellation,
    pub trials: usize,
    pub seed: u64,
    /// Expected framed transmit power the SNR refers to.
    pub signal_power: f64,
    pub points: Vec<SerPoint>,
}

/// Wilson score interval for `errors` out of `n`.
pub fn wilson_interval(errors: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Monte-Carlo symbol error rate, one block per trial.
///
/// SNR is per sample relative to the expected framed transmit power. Trial
/// `t` at SNR index `i` draws data and noise from the stream seeded with
/// `seed ^ (i·trials + t)`, so results do not depend on thread count.
pub fn run_ser(
    config: &ValidatedConfig,
    channel_profile: &ChannelProfile,
    receiver: ReceiverKind,
    constellation: Constellation,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SerReport, Error> {
    if trials == 0 {
        return Err(AnalysisError::NoTrials.into());
    }
    let tr = Transceiver::new(config)?;
    let s = tr.grid().s;
    let model = match channel_profile {
        ChannelProfile::Awgn => None,
        ChannelProfile::Multipath { taps } => Some(ChannelModel::multipath(taps.clone(), None, 0)?),
    };
    let signal_power = tr.expected_frame_power();
    let active = tr.active_positions();
    let symbols_per_trial = active.len() as u64;

    // ZF and MF do not depend on the noise level.
    let shared = match receiver {
        ReceiverKind::Mmse => None,
        other => Some(tr.receiver(other.receiver(0.0))?),
    };

    let mut points = Vec::with_capacity(snr_db.len());
    for (i, &snr) in snr_db.iter().enumerate() {
        let snr_lin = 10f64.powf(snr / 10.0);
        let noise_variance = if snr_lin.is_finite() { signal_power / snr_lin } else { 0.0 };
        let chain = match &shared {
            Some(c) => c.clone(),
            None => tr.receiver(receiver.receiver(noise_variance))?,
        };
        let equalizer = if noise_variance > 0.0 {
            Equalizer::Mmse { noise_var: 1.0 / snr_lin }
        } else {
            Equalizer::ZeroForcing
        };

        let run_trial = |t: usize| -> Result<u64, Error> {
            let index = (i * trials + t) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index);
            let data = tr.random_data(constellation, &mut rng);
            let framed = tr.transmit_framed(&data)?;
            let mut rx = match &model {
                Some(m) => channel::apply_channel(&framed, m).frame,
                None => framed,
            };
            if noise_variance > 0.0 {
                let noise = channel::complex_noise(rx.samples.len(), noise_variance, &mut rng);
                rx.samples.iter_mut().zip(noise).for_each(|(a, b)| *a += b);
            }
            let mut block = framing::remove_cp(&rx, s)?;
            if let Some(m) = &model {
                block = channel::fde_equalize(&block, m.taps(), equalizer)?;
            }
            let est = chain.detect(&block)?;
            Ok(active
                .iter()
                .filter(|&&(k, m)| constellation.decide(est.get(k, m)) != data.get(k, m))
                .count() as u64)
        };
        let errors = (0..trials)
            .into_par_iter()
            .map(run_trial)
            .try_reduce(|| 0, |a, b| Ok(a + b))?;

        let symbols = symbols_per_trial * trials as u64;
        let (ci_low, ci_high) = wilson_interval(errors, symbols, 1.96);
        points.push(SerPoint {
            snr_db: snr,
            symbols,
            errors,
            ser: if symbols > 0 { errors as f64 / symbols as f64 } else { 0.0 },
            ci_low,
            ci_high,
        });
    }
    Ok(SerReport {
        config_fingerprint: config.config().fingerprint(),
        channel: channel_profile.clone(),
        receiver,
        constellation,
        trials,
        seed,
        signal_power,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_config, WaveformConfig};

    fn ofdm() -> ValidatedConfig {
        validate_config(&WaveformConfig::new(16, 1, 16, 1).with_cp(4)).unwrap()
    }

    #[test]
    fn noiseless_is_error_free() {
        let r = run_ser(
            &ofdm(),
            &ChannelProfile::Awgn,
            ReceiverKind::Zf,
            Constellation::Qam16,
            &[f64::INFINITY],
            20,
            1,
        )
        .unwrap();
        assert_eq!(r.points[0].errors, 0);
        assert_eq!(r.points[0].symbols, 320);
    }

    #[test]
    fn deterministic_under_seed() {
        let run = || {
            run_ser(&ofdm(), &ChannelProfile::Awgn, ReceiverKind::Mf, Constellation::Qpsk, &[2.0, 6.0], 50, 11)
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn zero_trials_rejected() {
        let e = run_ser(&ofdm(), &ChannelProfile::Awgn, ReceiverKind::Mf, Constellation::Qpsk, &[0.0], 0, 1)
            .unwrap_err();
        assert_eq!(e.code(), "analysis.no_trials");
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30, 1000, 1.96);
        assert!(lo < 0.03 && 0.03 < hi);
        let (lo, hi) = wilson_interval(0, 1000, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
    }

    #[test]
    fn interval_shrinks_with_trials() {
        let width = |trials| {
            let r = run_ser(&ofdm(), &ChannelProfile::Awgn, ReceiverKind::Mf, Constellation::Qpsk, &[3.0], trials, 5)
                .unwrap();
            r.points[0].ci_high - r.points[0].ci_low
        };
        let ratio = width(100) / width(1600);
        // 1/sqrt(trials) scaling predicts 4.
        assert!((ratio - 4.0).abs() < 0.8, "{ratio}");
    }
}
