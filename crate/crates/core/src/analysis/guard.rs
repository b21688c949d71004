use std::ops::Range;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::AnalysisError;
use crate::dsp;
use crate::error::Error;
use crate::link::{Constellation, Transceiver};
use crate::modem::{BlockSignal, Receiver, ResourceGrid};
use crate::params::ValidatedConfig;

/// Leakage below this is reported as this value.
pub const LEAKAGE_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuardBandReport {
    pub guard: usize,
    pub time_offset: i64,
    /// Half-open subcarrier ranges `[start, end)`.
    pub allocation_a: [usize; 2],
    pub allocation_b: [usize; 2],
    pub interference_power: f64,
    pub signal_power: f64,
    pub leakage_db: f64,
}

/// Two users split the `K` subcarriers with `guard` empty subcarriers on
/// both sides of user B (the block is cyclic in frequency). User B is
/// delayed circularly by `time_offset` samples; the result is the power
/// user B leaves in user A's matched-filter outputs relative to A's symbol
/// power.
pub fn guard_band_leakage(
    config_a: &ValidatedConfig,
    config_b: &ValidatedConfig,
    guard: usize,
    time_offset: i64,
    seed: u64,
) -> Result<GuardBandReport, Error> {
    let a = Transceiver::new(config_a)?;
    let b = Transceiver::new(config_b)?;
    let k = a.grid().k;
    if k < 2 * guard + 2 {
        return Err(AnalysisError::OverlappingAllocations {
            detail: format!("{k} subcarriers cannot hold two users and two guards of {guard}"),
        }
        .into());
    }
    let a_len = (k - 2 * guard) / 2;
    let mut report = leakage_between(&a, &b, 0..a_len, a_len + guard..k - guard, time_offset, seed)?;
    report.guard = guard;
    Ok(report)
}

/// Leakage for explicit allocations. `guard` in the report is the smallest
/// cyclic distance between the allocations minus one.
pub fn leakage_between(
    a: &Transceiver,
    b: &Transceiver,
    alloc_a: Range<usize>,
    alloc_b: Range<usize>,
    time_offset: i64,
    seed: u64,
) -> Result<GuardBandReport, Error> {
    let (ga, gb) = (a.grid(), b.grid());
    if ga.s != gb.s || ga.k != gb.k || ga.subcarrier_spacing != gb.subcarrier_spacing {
        return Err(AnalysisError::IncompatibleUsers.into());
    }
    let k = ga.k;
    let overlap = |detail: String| -> Error { AnalysisError::OverlappingAllocations { detail }.into() };
    if alloc_a.is_empty() || alloc_b.is_empty() || alloc_a.end > k || alloc_b.end > k {
        return Err(overlap(format!("allocations {alloc_a:?}, {alloc_b:?} must be non-empty within 0..{k}")));
    }
    if alloc_a.start < alloc_b.end && alloc_b.start < alloc_a.end {
        return Err(overlap(format!("{alloc_a:?} and {alloc_b:?} share subcarriers")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fill = |tr: &Transceiver, alloc: &Range<usize>, rng: &mut ChaCha8Rng| {
        let full = tr.random_data(Constellation::Qpsk, rng);
        ResourceGrid::from_fn(tr.grid(), |kk, m| {
            if alloc.contains(&kk) {
                full.get(kk, m)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let data_a = fill(a, &alloc_a, &mut rng);
    let data_b = fill(b, &alloc_b, &mut rng);

    let x_b = b.transmit(&data_b)?;
    let received = BlockSignal::new(dsp::circular_delay(&x_b.samples, time_offset));
    let mf = a.receiver(Receiver::MatchedFilter)?.detect(&received)?;

    let positions: Vec<(usize, usize)> = a
        .active_positions()
        .into_iter()
        .filter(|(kk, _)| alloc_a.contains(kk))
        .collect();
    let count = positions.len() as f64;
    let interference_power = positions.iter().map(|&(kk, m)| mf.get(kk, m).norm_sqr()).sum::<f64>() / count;
    let signal_power = positions.iter().map(|&(kk, m)| data_a.get(kk, m).norm_sqr()).sum::<f64>() / count;
    let leakage_db = (10.0 * (interference_power / signal_power).log10()).max(LEAKAGE_FLOOR_DB);

    let gap = |x: &Range<usize>, y: &Range<usize>| (y.start + k - x.end) % k;
    let guard = gap(&alloc_a, &alloc_b).min(gap(&alloc_b, &alloc_a));
    Ok(GuardBandReport {
        guard,
        time_offset,
        allocation_a: [alloc_a.start, alloc_a.end],
        allocation_b: [alloc_b.start, alloc_b.end],
        interference_power,
        signal_power,
        leakage_db,
    })
}
