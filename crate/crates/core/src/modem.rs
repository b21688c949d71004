//! Block modulation over the resource grid and its linear inverses.
//!
//! Synthesis is a Gabor expansion: `x = Σ d_{k,m} g_{k,m}`. The matched filter
//! is the Gabor transform with the same window (`Aᴴx`); zero forcing uses the
//! pseudo-inverse, i.e. the canonical dual window. All matrices are laid out
//! k-major, column `n = k·M + m`.
//!
//! [`Modem`] implements synthesis and matched filtering in the frequency
//! domain, one length-`M` DFT per subcarrier plus one length-`S` DFT per block.
//! [`build_matrix`] gives the dense reference they must agree with.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp;
use crate::params::GridParams;
use crate::pulses::{self, PrototypePulse, PulseError};

/// Relative singular-value threshold for numerical rank.
pub const RANK_EPSILON: f64 = 1e-12;

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModemError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix has rank {rank} < {needed} (smallest singular value {min_singular_value:e})")]
    RankDeficient {
        rank: usize,
        needed: usize,
        min_singular_value: f64,
    },
    #[error("subsymbol spacing P={p} is odd; half-subsymbol offsets need an even P")]
    OddP { p: usize },
    #[error("pulse is not root-Nyquist within two subcarriers (fold deviation {fold_deviation:e}, energy outside {outside_energy:e})")]
    PulseNotRootNyquist {
        fold_deviation: f64,
        outside_energy: f64,
    },
    #[error("expected a {expected} matrix")]
    WrongMatrixDomain { expected: &'static str },
    #[error("noise variance {0} must be finite and non-negative")]
    InvalidNoiseVariance(f64),
    #[error(transparent)]
    Pulse(#[from] PulseError),
}

/// `K×M` complex data symbols, k-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    data: Vec<Complex64>,
    grid: GridParams,
}

impl ResourceGrid {
    pub fn zeros(grid: &GridParams) -> Self {
        ResourceGrid {
            data: vec![Complex64::new(0.0, 0.0); grid.n],
            grid: *grid,
        }
    }

    pub fn from_vec(grid: &GridParams, data: Vec<Complex64>) -> Result<Self, ModemError> {
        if data.len() != grid.n {
            return Err(ModemError::DimensionMismatch {
                expected: grid.n,
                got: data.len(),
            });
        }
        Ok(ResourceGrid { data, grid: *grid })
    }

    pub fn from_fn(grid: &GridParams, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.n);
        for k in 0..grid.k {
            for m in 0..grid.m {
                data.push(f(k, m));
            }
        }
        ResourceGrid { data, grid: *grid }
    }

    pub fn grid(&self) -> &GridParams {
        &self.grid
    }

    pub fn get(&self, k: usize, m: usize) -> Complex64 {
        self.data[self.grid.column(k, m)]
    }

    pub fn set(&mut self, k: usize, m: usize, value: Complex64) {
        let i = self.grid.column(k, m);
        self.data[i] = value;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn max_abs_diff(&self, other: &ResourceGrid) -> f64 {
        dsp::max_abs_diff(&self.data, &other.data)
    }
}

/// `K×2M` real OQAM inputs. Column `2m` rides the expansion at `mP`, column
/// `2m+1` the expansion at `mP + P/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    data: Vec<f64>,
    k: usize,
    cols: usize,
}

impl RealGrid {
    pub fn zeros(grid: &GridParams) -> Self {
        RealGrid {
            data: vec![0.0; 2 * grid.n],
            k: grid.k,
            cols: 2 * grid.m,
        }
    }

    pub fn from_vec(grid: &GridParams, data: Vec<f64>) -> Result<Self, ModemError> {
        if data.len() != 2 * grid.n {
            return Err(ModemError::DimensionMismatch {
                expected: 2 * grid.n,
                got: data.len(),
            });
        }
        Ok(RealGrid {
            data,
            k: grid.k,
            cols: 2 * grid.m,
        })
    }

    pub fn rows(&self) -> usize {
        self.k
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, k: usize, col: usize) -> f64 {
        self.data[k * self.cols + col]
    }

    pub fn set(&mut self, k: usize, col: usize, value: f64) {
        self.data[k * self.cols + col] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs_diff(&self, other: &RealGrid) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// One modulated block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSignal {
    pub samples: Vec<Complex64>,
    /// A cyclic prefix or zero padding is attached.
    pub framed: bool,
}

impl BlockSignal {
    pub fn new(samples: Vec<Complex64>) -> Self {
        BlockSignal {
            samples,
            framed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Linear receiver applied to an unframed block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Receiver {
    MatchedFilter,
    ZeroForcing,
    Mmse { noise_variance: f64 },
}

/// Dense synthesis matrix.
///
/// For OQAM the matrix maps `2N` real inputs, so rank and Gram metrics are
/// taken in the real domain (`[Re A; Im A]`, `Re AᴴA`).
#[derive(Debug, Clone)]
pub struct ModMatrix {
    columns: DMatrix<Complex64>,
    rank: usize,
    singular_values: Vec<f64>,
    grid: GridParams,
    real_input: bool,
}

impl ModMatrix {
    pub fn columns(&self) -> &DMatrix<Complex64> {
        &self.columns
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn grid(&self) -> &GridParams {
        &self.grid
    }

    pub fn is_real_input(&self) -> bool {
        self.real_input
    }

    /// Number of input coefficients (`N`, or `2N` for OQAM).
    pub fn input_len(&self) -> usize {
        self.columns.ncols()
    }

    /// `AᴴA`, or `Re AᴴA` for real-input matrices.
    pub fn gram(&self) -> DMatrix<f64> {
        let g = self.columns.adjoint() * &self.columns;
        if self.real_input {
            g.map(|v| v.re)
        } else {
            // Complex Gram reduced to magnitudes for off-diagonal checks.
            g.map(|v| v.norm())
        }
    }

    /// Stacked `[Re A; Im A]`.
    pub fn real_stacked(&self) -> DMatrix<f64> {
        let s = self.columns.nrows();
        let n = self.columns.ncols();
        DMatrix::from_fn(2 * s, n, |r, c| {
            if r < s {
                self.columns[(r, c)].re
            } else {
                self.columns[(r - s, c)].im
            }
        })
    }

    fn from_columns(columns: DMatrix<Complex64>, grid: &GridParams, real_input: bool) -> Self {
        let mut singular_values: Vec<f64> = if real_input {
            let stacked = DMatrix::from_fn(2 * columns.nrows(), columns.ncols(), |r, c| {
                let s = columns.nrows();
                if r < s {
                    columns[(r, c)].re
                } else {
                    columns[(r - s, c)].im
                }
            });
            stacked.singular_values().iter().copied().collect()
        } else {
            columns.singular_values().iter().copied().collect()
        };
        singular_values.sort_by(|a, b| b.total_cmp(a));
        let sigma_max = singular_values.first().copied().unwrap_or(0.0);
        let threshold = grid.s as f64 * RANK_EPSILON * sigma_max;
        let rank = singular_values.iter().filter(|&&v| v > threshold).count();
        ModMatrix {
            columns,
            rank,
            singular_values,
            grid: *grid,
            real_input,
        }
    }
}

/// Dense `S×N` matrix whose column `k·M+m` is `g_{k,m}`.
pub fn build_matrix(pulse: &PrototypePulse, grid: &GridParams) -> Result<ModMatrix, ModemError> {
    let mut columns = DMatrix::<Complex64>::zeros(grid.s, grid.n);
    for k in 0..grid.k {
        for m in 0..grid.m {
            let col = pulses::shift_pulse(pulse, m, k, grid)?;
            columns.set_column(grid.column(k, m), &DVector::from_vec(col));
        }
    }
    Ok(ModMatrix::from_columns(columns, grid, false))
}

fn oqam_phases(k: usize) -> (Complex64, Complex64) {
    if k.is_multiple_of(2) {
        (Complex64::new(1.0, 0.0), J)
    } else {
        (J, Complex64::new(1.0, 0.0))
    }
}

fn oqam_column(
    pulse: &PrototypePulse,
    grid: &GridParams,
    k: usize,
    col: usize,
) -> Vec<Complex64> {
    let m = col / 2;
    let offset = col % 2;
    let (theta_i, theta_q) = oqam_phases(k);
    let theta = if offset == 0 { theta_i } else { theta_q };
    let q = grid.subcarrier_spacing;
    let delay = m * grid.subsymbol_spacing + offset * grid.subsymbol_spacing / 2;
    pulses::time_frequency_shift(
        pulse.samples(),
        delay as i64,
        k as i128 * *q.numer() as i128,
        *q.denom() as i128,
    )
    .into_iter()
    .map(|v| v * theta)
    .collect()
}

/// Dense `S×2N` real-input OQAM synthesis matrix, column `k·2M + j`.
pub fn build_oqam_matrix(
    pulse: &PrototypePulse,
    grid: &GridParams,
) -> Result<ModMatrix, ModemError> {
    check_pulse_len(pulse, grid)?;
    if !grid.subsymbol_spacing.is_multiple_of(2) {
        return Err(ModemError::OddP {
            p: grid.subsymbol_spacing,
        });
    }
    let cols = 2 * grid.m;
    let mut columns = DMatrix::<Complex64>::zeros(grid.s, 2 * grid.n);
    for k in 0..grid.k {
        for j in 0..cols {
            let col = oqam_column(pulse, grid, k, j);
            columns.set_column(k * cols + j, &DVector::from_vec(col));
        }
    }
    Ok(ModMatrix::from_columns(columns, grid, true))
}

fn check_pulse_len(pulse: &PrototypePulse, grid: &GridParams) -> Result<(), ModemError> {
    if pulse.len() != grid.s {
        return Err(PulseError::LengthMismatch {
            expected: grid.s,
            got: pulse.len(),
        }
        .into());
    }
    Ok(())
}

/// Verify the pulse is root-Nyquist for time step `P` and confined to two
/// subcarrier bandwidths, the precondition for interference-free OQAM.
pub fn check_root_nyquist(pulse: &PrototypePulse, grid: &GridParams) -> Result<(), ModemError> {
    check_pulse_len(pulse, grid)?;
    let spec = pulse.spectrum();
    let s = grid.s;
    let m = grid.m;
    let fold = |r: usize| -> f64 { (r..s).step_by(m).map(|q| spec[q].norm_sqr()).sum() };
    let folds: Vec<f64> = (0..m).map(fold).collect();
    let mean = folds.iter().sum::<f64>() / m as f64;
    let fold_deviation = folds
        .iter()
        .map(|f| (f - mean).abs())
        .fold(0.0, f64::max);
    let q = grid.subcarrier_spacing;
    let half_width = *q.numer() as f64 / *q.denom() as f64;
    let outside_energy: f64 = (0..s)
        .filter(|&q| (dsp::centered_bin(q, s) as f64).abs() >= half_width)
        .map(|q| spec[q].norm_sqr())
        .sum();
    if fold_deviation > 1e-9 || outside_energy > 1e-20 {
        return Err(ModemError::PulseNotRootNyquist {
            fold_deviation,
            outside_energy,
        });
    }
    Ok(())
}

/// Synthesis and matched filtering with precomputed pulse spectra and FFT
/// plans. Shareable between threads.
#[derive(Clone)]
pub struct Modem {
    grid: GridParams,
    pulse: Vec<Complex64>,
    /// Unnormalized DFT of `g`, then of `g` delayed by `P/2` (even `P` only).
    spectra: [Option<Vec<Complex64>>; 2],
    support: Vec<usize>,
    subcarrier_step: Option<usize>,
    fft_s_inv: Arc<dyn Fft<f64>>,
    fft_s_fwd: Arc<dyn Fft<f64>>,
    fft_m_fwd: Arc<dyn Fft<f64>>,
    fft_m_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Modem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Modem").field("grid", &self.grid).finish()
    }
}

impl Modem {
    pub fn new(pulse: &PrototypePulse, grid: &GridParams) -> Result<Self, ModemError> {
        check_pulse_len(pulse, grid)?;
        let s = grid.s;
        let p = grid.subsymbol_spacing;
        let base = dsp::fft(pulse.samples());
        let half = p.is_multiple_of(2).then(|| {
            let d = (p / 2) as i128;
            base.iter()
                .enumerate()
                .map(|(b, v)| v * dsp::unit_phasor(-(b as i128) * d, s as i128))
                .collect()
        });
        let peak = base.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let support = (0..s).filter(|&b| base[b].norm() > peak * 1e-15).collect();
        let mut planner = FftPlanner::new();
        Ok(Modem {
            grid: *grid,
            pulse: pulse.samples().to_vec(),
            spectra: [Some(base), half],
            support,
            subcarrier_step: grid.integer_subcarrier_spacing(),
            fft_s_inv: planner.plan_fft_inverse(s),
            fft_s_fwd: planner.plan_fft_forward(s),
            fft_m_fwd: planner.plan_fft_forward(grid.m),
            fft_m_inv: planner.plan_fft_inverse(grid.m),
        })
    }

    pub fn grid(&self) -> &GridParams {
        &self.grid
    }

    fn delay(&self, half: bool) -> usize {
        if half {
            self.grid.subsymbol_spacing / 2
        } else {
            0
        }
    }

    fn spectrum(&self, half: bool) -> Result<&[Complex64], ModemError> {
        self.spectra[half as usize]
            .as_deref()
            .ok_or(ModemError::OddP {
                p: self.grid.subsymbol_spacing,
            })
    }

    /// `Σ c_{k,m} g_{k,m}` with every pulse additionally delayed by `P/2`
    /// when `half` is set.
    fn synthesize(&self, coeffs: &[Complex64], half: bool) -> Result<Vec<Complex64>, ModemError> {
        let g = &self.grid;
        let spectrum = self.spectrum(half)?;
        let Some(q) = self.subcarrier_step else {
            return Ok(self.synthesize_direct(coeffs, half));
        };
        let s = g.s;
        let m = g.m;
        let mut x = vec![Complex64::new(0.0, 0.0); s];
        let mut d = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..g.k {
            let row = &coeffs[k * m..(k + 1) * m];
            if row.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            d.copy_from_slice(row);
            self.fft_m_fwd.process(&mut d);
            let shift = (k * q) % s;
            for &b in &self.support {
                let idx = b + shift;
                let idx = if idx >= s { idx - s } else { idx };
                x[idx] += d[b % m] * spectrum[b];
            }
        }
        self.fft_s_inv.process(&mut x);
        let scale = 1.0 / s as f64;
        x.iter_mut().for_each(|v| *v *= scale);
        Ok(x)
    }

    fn synthesize_direct(&self, coeffs: &[Complex64], half: bool) -> Vec<Complex64> {
        let g = &self.grid;
        let q = g.subcarrier_spacing;
        let mut x = vec![Complex64::new(0.0, 0.0); g.s];
        for k in 0..g.k {
            for m in 0..g.m {
                let c = coeffs[g.column(k, m)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let col = pulses::time_frequency_shift(
                    &self.pulse,
                    (m * g.subsymbol_spacing + self.delay(half)) as i64,
                    k as i128 * *q.numer() as i128,
                    *q.denom() as i128,
                );
                x.iter_mut().zip(col).for_each(|(acc, v)| *acc += c * v);
            }
        }
        x
    }

    /// Inner products `⟨g_{k,m}, x⟩`, k-major.
    fn analyze(&self, x: &[Complex64], half: bool) -> Result<Vec<Complex64>, ModemError> {
        let g = &self.grid;
        if x.len() != g.s {
            return Err(ModemError::DimensionMismatch {
                expected: g.s,
                got: x.len(),
            });
        }
        let spectrum = self.spectrum(half)?;
        let Some(q) = self.subcarrier_step else {
            return Ok(self.analyze_direct(x, half));
        };
        let s = g.s;
        let m = g.m;
        let mut xf = x.to_vec();
        self.fft_s_fwd.process(&mut xf);
        let mut out = Vec::with_capacity(g.n);
        let mut z = vec![Complex64::new(0.0, 0.0); m];
        let scale = 1.0 / s as f64;
        for k in 0..g.k {
            z.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            let shift = (k * q) % s;
            for &b in &self.support {
                let idx = b + shift;
                let idx = if idx >= s { idx - s } else { idx };
                z[b % m] += spectrum[b].conj() * xf[idx];
            }
            self.fft_m_inv.process(&mut z);
            out.extend(z.iter().map(|v| v * scale));
        }
        Ok(out)
    }

    fn analyze_direct(&self, x: &[Complex64], half: bool) -> Vec<Complex64> {
        let g = &self.grid;
        let q = g.subcarrier_spacing;
        let mut out = Vec::with_capacity(g.n);
        for k in 0..g.k {
            for m in 0..g.m {
                let col = pulses::time_frequency_shift(
                    &self.pulse,
                    (m * g.subsymbol_spacing + self.delay(half)) as i64,
                    k as i128 * *q.numer() as i128,
                    *q.denom() as i128,
                );
                out.push(col.iter().zip(x).map(|(c, v)| c.conj() * v).sum());
            }
        }
        out
    }

    pub fn modulate(&self, data: &ResourceGrid) -> Result<BlockSignal, ModemError> {
        if data.grid().n != self.grid.n || data.grid().s != self.grid.s {
            return Err(ModemError::DimensionMismatch {
                expected: self.grid.n,
                got: data.grid().n,
            });
        }
        Ok(BlockSignal::new(self.synthesize(data.data(), false)?))
    }

    /// `Aᴴx` as a grid.
    pub fn matched_filter(&self, x: &BlockSignal) -> Result<ResourceGrid, ModemError> {
        let out = self.analyze(&x.samples, false)?;
        ResourceGrid::from_vec(&self.grid, out)
    }

    pub fn oqam_map(&self, input: &RealGrid) -> Result<BlockSignal, ModemError> {
        let g = &self.grid;
        if !g.subsymbol_spacing.is_multiple_of(2) {
            return Err(ModemError::OddP {
                p: g.subsymbol_spacing,
            });
        }
        if input.data().len() != 2 * g.n {
            return Err(ModemError::DimensionMismatch {
                expected: 2 * g.n,
                got: input.data().len(),
            });
        }
        let mut in_phase = vec![Complex64::new(0.0, 0.0); g.n];
        let mut offset = vec![Complex64::new(0.0, 0.0); g.n];
        for k in 0..g.k {
            let (theta_i, theta_q) = oqam_phases(k);
            for m in 0..g.m {
                in_phase[g.column(k, m)] = theta_i * input.get(k, 2 * m);
                offset[g.column(k, m)] = theta_q * input.get(k, 2 * m + 1);
            }
        }
        let mut x = self.synthesize(&in_phase, false)?;
        let second = self.synthesize(&offset, true)?;
        x.iter_mut().zip(second).for_each(|(a, b)| *a += b);
        Ok(BlockSignal::new(x))
    }

    pub fn oqam_demap(&self, x: &BlockSignal) -> Result<RealGrid, ModemError> {
        let g = &self.grid;
        if !g.subsymbol_spacing.is_multiple_of(2) {
            return Err(ModemError::OddP {
                p: g.subsymbol_spacing,
            });
        }
        let first = self.analyze(&x.samples, false)?;
        let second = self.analyze(&x.samples, true)?;
        let mut out = RealGrid::zeros(g);
        for k in 0..g.k {
            let (theta_i, theta_q) = oqam_phases(k);
            for m in 0..g.m {
                let c = g.column(k, m);
                out.set(k, 2 * m, (theta_i.conj() * first[c]).re);
                out.set(k, 2 * m + 1, (theta_q.conj() * second[c]).re);
            }
        }
        Ok(out)
    }
}

/// `x = Σ d_{k,m} g_{k,m}`.
pub fn modulate(data: &ResourceGrid, pulse: &PrototypePulse) -> Result<BlockSignal, ModemError> {
    Modem::new(pulse, data.grid())?.modulate(data)
}

/// Two half-subsymbol-offset real-input expansions.
pub fn oqam_map(
    input: &RealGrid,
    pulse: &PrototypePulse,
    grid: &GridParams,
) -> Result<BlockSignal, ModemError> {
    Modem::new(pulse, grid)?.oqam_map(input)
}

pub fn oqam_demap(
    x: &BlockSignal,
    pulse: &PrototypePulse,
    grid: &GridParams,
) -> Result<RealGrid, ModemError> {
    Modem::new(pulse, grid)?.oqam_demap(x)
}

#[derive(Debug, Clone)]
enum Weights {
    Complex(DMatrix<Complex64>),
    Real(DMatrix<f64>),
}

/// Linear detector `W` precomputed from a [`ModMatrix`].
#[derive(Debug, Clone)]
pub struct Detector {
    weights: Weights,
    grid: GridParams,
}

impl Detector {
    pub fn new(matrix: &ModMatrix, receiver: Receiver) -> Result<Self, ModemError> {
        let n = matrix.input_len();
        if let Receiver::Mmse { noise_variance } = receiver {
            if !(noise_variance.is_finite() && noise_variance >= 0.0) {
                return Err(ModemError::InvalidNoiseVariance(noise_variance));
            }
        }
        let rank_error = || ModemError::RankDeficient {
            rank: matrix.rank(),
            needed: n,
            min_singular_value: matrix.singular_values().last().copied().unwrap_or(0.0),
        };
        let threshold = matrix.grid().s as f64
            * RANK_EPSILON
            * matrix.singular_values().first().copied().unwrap_or(0.0);

        let weights = if matrix.is_real_input() {
            let a = matrix.real_stacked();
            let w = match receiver {
                Receiver::MatchedFilter => a.transpose(),
                Receiver::ZeroForcing => {
                    if matrix.rank() < n {
                        return Err(rank_error());
                    }
                    a.svd(true, true)
                        .pseudo_inverse(threshold)
                        .map_err(|_| rank_error())?
                }
                Receiver::Mmse { noise_variance } => {
                    let mut gram = a.transpose() * &a;
                    for i in 0..n {
                        gram[(i, i)] += noise_variance;
                    }
                    let chol = gram.cholesky().ok_or_else(rank_error)?;
                    chol.solve(&a.transpose())
                }
            };
            Weights::Real(w)
        } else {
            let a = matrix.columns();
            let w = match receiver {
                Receiver::MatchedFilter => a.adjoint(),
                Receiver::ZeroForcing => {
                    if matrix.rank() < n {
                        return Err(rank_error());
                    }
                    a.clone()
                        .svd(true, true)
                        .pseudo_inverse(threshold)
                        .map_err(|_| rank_error())?
                }
                Receiver::Mmse { noise_variance } => {
                    let mut gram = a.adjoint() * a;
                    for i in 0..n {
                        gram[(i, i)] += Complex64::new(noise_variance, 0.0);
                    }
                    let chol = gram.cholesky().ok_or_else(rank_error)?;
                    chol.solve(&a.adjoint())
                }
            };
            Weights::Complex(w)
        };
        Ok(Detector {
            weights,
            grid: *matrix.grid(),
        })
    }

    fn check_len(&self, x: &BlockSignal) -> Result<(), ModemError> {
        if x.len() != self.grid.s {
            return Err(ModemError::DimensionMismatch {
                expected: self.grid.s,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Complex-input detection.
    pub fn detect(&self, x: &BlockSignal) -> Result<ResourceGrid, ModemError> {
        self.check_len(x)?;
        let Weights::Complex(w) = &self.weights else {
            return Err(ModemError::WrongMatrixDomain { expected: "complex-input" });
        };
        let y = w * DVector::from_column_slice(&x.samples);
        ResourceGrid::from_vec(&self.grid, y.iter().copied().collect())
    }

    /// Real-input (OQAM) detection.
    pub fn detect_real(&self, x: &BlockSignal) -> Result<RealGrid, ModemError> {
        self.check_len(x)?;
        let Weights::Real(w) = &self.weights else {
            return Err(ModemError::WrongMatrixDomain { expected: "real-input" });
        };
        let stacked = DVector::from_iterator(
            2 * x.len(),
            x.samples
                .iter()
                .map(|v| v.re)
                .chain(x.samples.iter().map(|v| v.im)),
        );
        let y = w * stacked;
        RealGrid::from_vec(&self.grid, y.iter().copied().collect())
    }
}

/// One-shot detection: MF `Aᴴx`, ZF `A⁺x`, MMSE `(AᴴA + σ²I)⁻¹Aᴴx`.
pub fn demodulate(
    x: &BlockSignal,
    matrix: &ModMatrix,
    receiver: Receiver,
) -> Result<ResourceGrid, ModemError> {
    Detector::new(matrix, receiver)?.detect(x)
}
