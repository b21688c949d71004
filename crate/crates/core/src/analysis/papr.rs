use num_complex::Complex64;
use serde::Serialize;

use super::AnalysisError;

/// `P(PAPR > threshold_db)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfPoint {
    pub threshold_db: f64,
    pub probability: f64,
}

/// `max|x|²/mean|x|²` in dB for each consecutive `block`-sample block.
/// All-zero blocks report 0 dB.
pub fn papr(x: &[Complex64], block: usize) -> Result<Vec<f64>, AnalysisError> {
    if block == 0 || !x.len().is_multiple_of(block) || x.is_empty() {
        return Err(AnalysisError::BlockSizeMismatch {
            block,
            len: x.len(),
        });
    }
    Ok(x.chunks(block)
        .map(|b| {
            let powers = b.iter().map(|v| v.norm_sqr());
            let peak = powers.clone().fold(0.0, f64::max);
            let mean = powers.sum::<f64>() / block as f64;
            if mean > 0.0 {
                10.0 * (peak / mean).log10()
            } else {
                0.0
            }
        })
        .collect())
}

/// Empirical CCDF evaluated at every observed value, ascending thresholds.
pub fn ccdf(values_db: &[f64]) -> Vec<CcdfPoint> {
    let mut sorted = values_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let n = values_db.len() as f64;
    sorted
        .into_iter()
        .map(|t| CcdfPoint {
            threshold_db: t,
            probability: values_db.iter().filter(|&&v| v > t).count() as f64 / n,
        })
        .collect()
}

/// Nearest-rank percentile, `pct` in `[0, 100]`.
pub fn percentile(values: &[f64], pct: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp;

    #[test]
    fn constant_envelope_is_zero_db() {
        let x: Vec<_> = (0..64).map(|n| dsp::unit_phasor(n * 3, 64)).collect();
        for v in papr(&x, 16).unwrap() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn single_pulse_is_ten_log_s() {
        let mut x = vec![Complex64::new(0.0, 0.0); 32];
        x[5] = Complex64::new(0.0, 2.0);
        let v = papr(&x, 32).unwrap();
        assert!((v[0] - 10.0 * 32f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn ccdf_non_increasing() {
        let vals = [3.0, 1.0, 2.0, 2.0, 5.0];
        let c = ccdf(&vals);
        assert_eq!(c.len(), 4);
        assert!(c.windows(2).all(|w| w[1].probability <= w[0].probability));
        assert_eq!(c[0].probability, 0.8);
        assert_eq!(c.last().unwrap().probability, 0.0);
        assert_eq!(percentile(&vals, 50.0), Some(2.0));
        assert_eq!(percentile(&vals, 100.0), Some(5.0));
    }

    #[test]
    fn block_mismatch() {
        let x = vec![Complex64::new(1.0, 0.0); 10];
        assert!(papr(&x, 3).is_err());
    }
}
