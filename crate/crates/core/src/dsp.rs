//! Small DFT and vector helpers shared by the modules.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Unnormalized forward DFT, `X[q] = Σ x[n] e^{-j2πqn/S}`.
pub fn fft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

/// Inverse DFT including the `1/S` factor.
pub fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
    buf
}

/// Unitary DFT (`1/√S` scaling).
pub fn unitary_fft(x: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    fft(x).into_iter().map(|v| v * scale).collect()
}

/// `e^{j2π·num/den}` with the numerator reduced first to keep the angle small.
pub fn unit_phasor(num: i128, den: i128) -> Complex64 {
    let r = num.rem_euclid(den);
    Complex64::from_polar(1.0, 2.0 * PI * r as f64 / den as f64)
}

/// `y[n] = x[(n - delay) mod S]`.
pub fn circular_delay(x: &[Complex64], delay: i64) -> Vec<Complex64> {
    let s = x.len() as i64;
    (0..s)
        .map(|n| x[(n - delay).rem_euclid(s) as usize])
        .collect()
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        energy(x) / x.len() as f64
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Signed bin index in `[-⌊S/2⌋, ⌈S/2⌉)` for DFT bin `q`.
pub fn centered_bin(q: usize, s: usize) -> i64 {
    if q >= s - s / 2 {
        q as i64 - s as i64
    } else {
        q as i64
    }
}
