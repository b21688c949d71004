//! Cyclic prefix, zero padding, edge windowing, silent subsymbols and
//! multi-block streams.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modem::{BlockSignal, ResourceGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FramingError {
    #[error("cyclic prefix {cp_length} not shorter than block length {s}")]
    CpTooLong { cp_length: usize, s: usize },
    #[error("window ramp {ramp} longer than prefix {cp_length}")]
    RampTooLong { ramp: usize, cp_length: usize },
    #[error("frame has {got} samples, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("silent subsymbols {silent} outside 0..={max}")]
    SilentSubsymbolsOutOfRange { silent: usize, max: usize },
}

/// Block with prefix attached.
#[derive(Debug, Clone, PartialEq)]
pub struct FramedBlock {
    pub samples: Vec<Complex64>,
    pub cp_length: usize,
    pub ramp: usize,
    /// Prefix is zeros rather than a copy of the block tail.
    pub zero_padded: bool,
}

impl FramedBlock {
    pub fn block_len(&self) -> usize {
        self.samples.len() - self.cp_length
    }
}

/// Rising half of a raised-cosine window, `ramp` samples.
pub fn raised_cosine_ramp(ramp: usize) -> Vec<f64> {
    (0..ramp)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::PI * (i as f64 + 0.5) / ramp as f64).cos()))
        .collect()
}

fn check_prefix(s: usize, cp_length: usize, ramp: usize) -> Result<(), FramingError> {
    if cp_length >= s && cp_length > 0 {
        return Err(FramingError::CpTooLong { cp_length, s });
    }
    if ramp > cp_length {
        return Err(FramingError::RampTooLong { ramp, cp_length });
    }
    Ok(())
}

/// Prepend the last `cp_length` samples. A non-zero `ramp` tapers the
/// first and last `ramp` samples of the frame with a raised-cosine edge.
pub fn add_cp(x: &BlockSignal, cp_length: usize, ramp: usize) -> Result<FramedBlock, FramingError> {
    let s = x.len();
    check_prefix(s, cp_length, ramp)?;
    let mut samples = Vec::with_capacity(s + cp_length);
    samples.extend_from_slice(&x.samples[s - cp_length..]);
    samples.extend_from_slice(&x.samples);
    if ramp > 0 {
        let len = samples.len();
        for (i, w) in raised_cosine_ramp(ramp).into_iter().enumerate() {
            samples[i] *= w;
            samples[len - 1 - i] *= w;
        }
    }
    Ok(FramedBlock {
        samples,
        cp_length,
        ramp,
        zero_padded: false,
    })
}

/// Prepend `guard` zeros. No circular-convolution guarantee.
pub fn add_zero_padding(x: &BlockSignal, guard: usize) -> Result<FramedBlock, FramingError> {
    check_prefix(x.len(), guard, 0)?;
    let mut samples = vec![Complex64::new(0.0, 0.0); guard];
    samples.extend_from_slice(&x.samples);
    Ok(FramedBlock {
        samples,
        cp_length: guard,
        ramp: 0,
        zero_padded: true,
    })
}

/// Drop the prefix of a frame expected to carry an `s`-sample block.
pub fn remove_cp(y: &FramedBlock, s: usize) -> Result<BlockSignal, FramingError> {
    let expected = s + y.cp_length;
    if y.samples.len() != expected {
        return Err(FramingError::LengthMismatch {
            expected,
            got: y.samples.len(),
        });
    }
    Ok(BlockSignal::new(y.samples[y.cp_length..].to_vec()))
}

/// Subsymbol indices silenced by `silent`: `⌈silent/2⌉` at the head and
/// `⌊silent/2⌋` at the tail.
pub fn silent_subsymbol_indices(m: usize, silent: usize) -> Vec<usize> {
    if silent == 0 {
        return Vec::new();
    }
    let head = silent.div_ceil(2);
    let tail = silent / 2;
    (0..head).chain(m - tail..m).collect()
}

/// Zero the silent subsymbols. Capacity drops to `K·(M − silent)`.
pub fn apply_silent_subsymbols(
    grid: &ResourceGrid,
    silent: usize,
) -> Result<ResourceGrid, FramingError> {
    let m = grid.grid().m;
    let max = m.saturating_sub(2);
    if silent > 0 && silent > max {
        return Err(FramingError::SilentSubsymbolsOutOfRange { silent, max });
    }
    let mut out = grid.clone();
    let silenced = silent_subsymbol_indices(m, silent);
    for k in 0..grid.grid().k {
        for &mm in &silenced {
            out.set(k, mm, Complex64::new(0.0, 0.0));
        }
    }
    Ok(out)
}

/// Location of one frame inside a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockBoundary {
    pub start: usize,
    pub cp_length: usize,
    pub len: usize,
}

/// Contiguous frames with their boundaries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameStream {
    pub samples: Vec<Complex64>,
    pub blocks: Vec<BlockBoundary>,
}

impl FrameStream {
    pub fn push(&mut self, frame: &FramedBlock) {
        self.blocks.push(BlockBoundary {
            start: self.samples.len(),
            cp_length: frame.cp_length,
            len: frame.samples.len(),
        });
        self.samples.extend_from_slice(&frame.samples);
    }

    /// Frames back out of the stream.
    pub fn frames(&self) -> impl Iterator<Item = FramedBlock> + '_ {
        self.blocks.iter().map(|b| FramedBlock {
            samples: self.samples[b.start..b.start + b.len].to_vec(),
            cp_length: b.cp_length,
            ramp: 0,
            zero_padded: false,
        })
    }
}

pub fn concat_frames<'a>(frames: impl IntoIterator<Item = &'a FramedBlock>) -> FrameStream {
    let mut stream = FrameStream::default();
    for f in frames {
        stream.push(f);
    }
    stream
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp;
    use crate::params::{validate_config, WaveformConfig};
    use rand::{Rng, SeedableRng};

    fn signal(s: usize, seed: u64) -> BlockSignal {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        BlockSignal::new(
            (0..s)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    }

    fn linear_conv(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
        for (i, a) in x.iter().enumerate() {
            for (j, b) in h.iter().enumerate() {
                y[i + j] += a * b;
            }
        }
        y
    }

    fn circular_conv(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        let s = x.len();
        (0..s)
            .map(|n| {
                h.iter()
                    .enumerate()
                    .map(|(l, hl)| hl * x[(n + s - l % s) % s])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn zero_cp_is_identity() {
        let x = signal(16, 1);
        let f = add_cp(&x, 0, 0).unwrap();
        assert_eq!(f.samples, x.samples);
        assert_eq!(remove_cp(&f, 16).unwrap().samples, x.samples);
    }

    #[test]
    fn prefix_copies_tail() {
        let x = signal(16, 2);
        let f = add_cp(&x, 4, 0).unwrap();
        assert_eq!(&f.samples[..4], &x.samples[12..]);
        assert_eq!(&f.samples[..4], &f.samples[16..20]);
        assert_eq!(remove_cp(&f, 16).unwrap().samples, x.samples);
    }

    #[test]
    fn prefix_turns_linear_into_circular() {
        let x = signal(32, 3);
        let h = signal(5, 4).samples;
        let f = add_cp(&x, 4, 0).unwrap();
        let y = linear_conv(&f.samples, &h);
        let rx = FramedBlock {
            samples: y[..f.samples.len()].to_vec(),
            ..f.clone()
        };
        let got = remove_cp(&rx, 32).unwrap();
        assert!(dsp::max_abs_diff(&got.samples, &circular_conv(&x.samples, &h)) < 1e-12);
    }

    #[test]
    fn ramp_touches_only_edges() {
        let x = signal(32, 5);
        let f = add_cp(&x, 8, 3).unwrap();
        let y = remove_cp(&f, 32).unwrap();
        assert_eq!(&y.samples[..29], &x.samples[..29]);
        assert_ne!(y.samples[31], x.samples[31]);
        // Ramp rises monotonically from near zero.
        let w = raised_cosine_ramp(3);
        assert!(w.windows(2).all(|p| p[0] < p[1]) && w[0] > 0.0 && w[2] < 1.0);
    }

    #[test]
    fn framing_errors() {
        let x = signal(8, 6);
        assert_eq!(
            add_cp(&x, 8, 0).unwrap_err(),
            FramingError::CpTooLong { cp_length: 8, s: 8 }
        );
        assert_eq!(
            add_cp(&x, 2, 3).unwrap_err(),
            FramingError::RampTooLong { ramp: 3, cp_length: 2 }
        );
        let f = add_cp(&x, 2, 0).unwrap();
        assert!(matches!(remove_cp(&f, 9), Err(FramingError::LengthMismatch { .. })));
    }

    #[test]
    fn zero_padding_prepends_zeros() {
        let x = signal(8, 7);
        let f = add_zero_padding(&x, 3).unwrap();
        assert!(f.zero_padded);
        assert!(f.samples[..3].iter().all(|v| v.norm() == 0.0));
        assert_eq!(remove_cp(&f, 8).unwrap().samples, x.samples);
    }

    #[test]
    fn silent_split_rule() {
        assert_eq!(silent_subsymbol_indices(8, 0), Vec::<usize>::new());
        assert_eq!(silent_subsymbol_indices(8, 2), vec![0, 7]);
        assert_eq!(silent_subsymbol_indices(8, 3), vec![0, 1, 7]);

        let g = *validate_config(&WaveformConfig::new(2, 8, 2, 8)).unwrap().grid();
        let d = ResourceGrid::from_fn(&g, |_, _| Complex64::new(1.0, 1.0));
        assert_eq!(apply_silent_subsymbols(&d, 0).unwrap(), d);
        let z = apply_silent_subsymbols(&d, 2).unwrap();
        for k in 0..g.k {
            for m in 0..g.m {
                let silent = m == 0 || m == 7;
                assert_eq!(z.get(k, m).norm() == 0.0, silent);
            }
        }
        assert!(matches!(
            apply_silent_subsymbols(&d, 7),
            Err(FramingError::SilentSubsymbolsOutOfRange { silent: 7, max: 6 })
        ));
    }

    #[test]
    fn stream_boundaries() {
        let a = add_cp(&signal(8, 1), 2, 0).unwrap();
        let b = add_cp(&signal(8, 2), 2, 0).unwrap();
        let st = concat_frames([&a, &b]);
        assert_eq!(st.samples.len(), 20);
        assert_eq!(st.blocks[1], BlockBoundary { start: 10, cp_length: 2, len: 10 });
        let back: Vec<_> = st.frames().collect();
        assert_eq!(back[1].samples, b.samples);
    }
}
