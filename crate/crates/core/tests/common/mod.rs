//! Reference implementations written directly from the definitions, kept
//! independent of the library's fast paths.
#![allow(dead_code)]

use std::f64::consts::PI;

use gfdm_core::params::GridParams;
use gfdm_core::Complex64;
use rand::Rng;

pub fn cis(phase: f64) -> Complex64 {
    Complex64::new(phase.cos(), phase.sin())
}

/// Exact `e^{j2π·num/den}` with the argument reduced in integers first.
pub fn cis_frac(num: i128, den: i128) -> Complex64 {
    let r = num.rem_euclid(den);
    cis(2.0 * PI * r as f64 / den as f64)
}

/// Unitary inverse DFT by direct summation.
pub fn idft_unitary(d: &[Complex64]) -> Vec<Complex64> {
    let n = d.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|t| {
            d.iter()
                .enumerate()
                .map(|(k, v)| v * cis_frac((k * t) as i128, n as i128))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Unitary forward DFT by direct summation.
pub fn dft_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * cis_frac(-((k * t) as i128), n as i128))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// `y[n] = x[(n − delay) mod S]·e^{j2π·(num/den)·n/S}`.
pub fn shift(x: &[Complex64], delay: i64, num: i128, den: i128) -> Vec<Complex64> {
    let s = x.len() as i64;
    (0..s)
        .map(|n| x[(n - delay).rem_euclid(s) as usize] * cis_frac(num * n as i128, den * s as i128))
        .collect()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Ambiguity value at `h` half-subsymbol steps and `k` subcarriers.
pub fn ambiguity_oracle(g: &[Complex64], grid: &GridParams, h: i64, k: i64) -> Complex64 {
    let q = grid.subcarrier_spacing;
    let shifted = shift(
        g,
        h * grid.subsymbol_spacing as i64 / 2,
        k as i128 * *q.numer() as i128,
        *q.denom() as i128,
    );
    inner(g, &shifted)
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    1.0 - Normal::standard().cdf(x)
}

/// Closed-form QPSK symbol error rate at symbol SNR `gamma` (linear).
pub fn qpsk_ser(gamma: f64) -> f64 {
    let q = q_function(gamma.sqrt());
    2.0 * q - q * q
}
