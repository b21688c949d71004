//! Configuration-driven transmit and receive chains.
//!
//! [`Transceiver`] ties a validated config to its pulse and modem, applies
//! silent subsymbols and framing, and hides the OQAM split: complex symbols
//! go in and come out, with `Re d_{k,m}` on the in-phase expansion and
//! `Im d_{k,m}` on the half-subsymbol-offset one.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::framing::{self, FramedBlock};
use crate::modem::{
    self, BlockSignal, Detector, ModMatrix, Modem, RealGrid, Receiver, ResourceGrid,
};
use crate::params::{GridParams, ValidatedConfig, WaveformConfig};
use crate::pulses::{self, PrototypePulse};

/// Unit average energy symbol alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constellation {
    Qpsk,
    Qam16,
}

impl Constellation {
    fn levels(self) -> &'static [f64] {
        const QPSK: [f64; 2] = [-1.0, 1.0];
        const QAM16: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];
        match self {
            Constellation::Qpsk => &QPSK,
            Constellation::Qam16 => &QAM16,
        }
    }

    fn scale(self) -> f64 {
        match self {
            Constellation::Qpsk => std::f64::consts::FRAC_1_SQRT_2,
            Constellation::Qam16 => 1.0 / 10f64.sqrt(),
        }
    }

    pub fn points(self) -> Vec<Complex64> {
        let l = self.levels();
        let s = self.scale();
        l.iter()
            .flat_map(|&re| l.iter().map(move |&im| Complex64::new(re * s, im * s)))
            .collect()
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        let l = self.levels();
        let s = self.scale();
        let re = l[rng.random_range(0..l.len())];
        let im = l[rng.random_range(0..l.len())];
        Complex64::new(re * s, im * s)
    }

    /// Nearest point, decided per dimension.
    pub fn decide(self, z: Complex64) -> Complex64 {
        let s = self.scale();
        let pick = |v: f64| -> f64 {
            let l = self.levels();
            let mut best = l[0];
            for &c in l {
                if (v / s - c).abs() < (v / s - best).abs() {
                    best = c;
                }
            }
            best * s
        };
        Complex64::new(pick(z.re), pick(z.im))
    }
}

/// Transmit and receive chains for one waveform.
#[derive(Debug, Clone)]
pub struct Transceiver {
    config: ValidatedConfig,
    pulse: PrototypePulse,
    modem: Modem,
    silent: Vec<usize>,
}

impl Transceiver {
    pub fn new(config: &ValidatedConfig) -> Result<Self, Error> {
        let grid = config.grid();
        let pulse = pulses::make_pulse(config.config().pulse_kind, grid)?;
        Self::with_pulse(config, pulse)
    }

    /// Use an externally supplied pulse in place of the configured kind.
    pub fn with_pulse(config: &ValidatedConfig, pulse: PrototypePulse) -> Result<Self, Error> {
        let grid = config.grid();
        let modem = Modem::new(&pulse, grid)?;
        if config.config().oqam && !grid.subsymbol_spacing.is_multiple_of(2) {
            return Err(modem::ModemError::OddP {
                p: grid.subsymbol_spacing,
            }
            .into());
        }
        Ok(Transceiver {
            config: config.clone(),
            pulse,
            modem,
            silent: framing::silent_subsymbol_indices(grid.m, config.config().silent_subsymbols),
        })
    }

    pub fn config(&self) -> &WaveformConfig {
        self.config.config()
    }

    pub fn validated(&self) -> &ValidatedConfig {
        &self.config
    }

    pub fn grid(&self) -> &GridParams {
        self.config.grid()
    }

    pub fn pulse(&self) -> &PrototypePulse {
        &self.pulse
    }

    pub fn modem(&self) -> &Modem {
        &self.modem
    }

    pub fn is_oqam(&self) -> bool {
        self.config.config().oqam
    }

    /// Subsymbol carries data (is not silent).
    pub fn is_active(&self, m: usize) -> bool {
        !self.silent.contains(&m)
    }

    /// `(k, m)` positions that carry data.
    pub fn active_positions(&self) -> Vec<(usize, usize)> {
        let g = self.grid();
        (0..g.k)
            .flat_map(|k| (0..g.m).map(move |m| (k, m)))
            .filter(|&(_, m)| self.is_active(m))
            .collect()
    }

    /// Random symbols on the active positions, zeros elsewhere.
    pub fn random_data<R: Rng + ?Sized>(
        &self,
        constellation: Constellation,
        rng: &mut R,
    ) -> ResourceGrid {
        ResourceGrid::from_fn(self.grid(), |_, m| {
            if self.is_active(m) {
                constellation.random(rng)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Modulate one block. Silent subsymbols are forced to zero.
    pub fn transmit(&self, data: &ResourceGrid) -> Result<BlockSignal, Error> {
        let data =
            framing::apply_silent_subsymbols(data, self.config.config().silent_subsymbols)?;
        if self.is_oqam() {
            Ok(self.modem.oqam_map(&split_oqam(&data))?)
        } else {
            Ok(self.modem.modulate(&data)?)
        }
    }

    /// Attach the configured prefix (cyclic or zeros) and window.
    pub fn frame(&self, x: &BlockSignal) -> Result<FramedBlock, Error> {
        let cfg = self.config.config();
        let framed = if cfg.zero_padding {
            framing::add_zero_padding(x, cfg.cp_length)?
        } else {
            framing::add_cp(x, cfg.cp_length, cfg.cs_window_length)?
        };
        Ok(framed)
    }

    pub fn transmit_framed(&self, data: &ResourceGrid) -> Result<FramedBlock, Error> {
        self.frame(&self.transmit(data)?)
    }

    /// Mean framed power for i.i.d. zero-mean unit-energy symbols on the
    /// active positions. Frequency shifts leave `|g_{k,m}[n]|` unchanged, so
    /// each sample carries `K·Σ_m |g[n − mP]|²`.
    pub fn expected_frame_power(&self) -> f64 {
        let g = self.grid();
        let cfg = self.config();
        let s = g.s;
        let p = g.subsymbol_spacing;
        let pulse = self.pulse.samples();
        let offsets: &[(usize, f64)] = if self.is_oqam() {
            &[(0, 0.5), (p / 2, 0.5)]
        } else {
            &[(0, 1.0)]
        };
        let mut per_sample = vec![0.0; s];
        for m in (0..g.m).filter(|&m| self.is_active(m)) {
            for &(offset, weight) in offsets {
                let delay = m * p + offset;
                for (n, v) in per_sample.iter_mut().enumerate() {
                    *v += weight * g.k as f64 * pulse[(n + s - delay % s) % s].norm_sqr();
                }
            }
        }
        let mut frame: Vec<f64> = if cfg.zero_padding {
            vec![0.0; cfg.cp_length]
        } else {
            per_sample[s - cfg.cp_length..].to_vec()
        };
        frame.extend_from_slice(&per_sample);
        let len = frame.len();
        if !cfg.zero_padding {
            for (i, w) in framing::raised_cosine_ramp(cfg.cs_window_length).into_iter().enumerate() {
                frame[i] *= w * w;
                frame[len - 1 - i] *= w * w;
            }
        }
        frame.iter().sum::<f64>() / len as f64
    }

    /// Dense synthesis matrix matching [`Transceiver::transmit`].
    pub fn matrix(&self) -> Result<ModMatrix, Error> {
        let grid = self.grid();
        let matrix = if self.is_oqam() {
            modem::build_oqam_matrix(&self.pulse, grid)?
        } else {
            modem::build_matrix(&self.pulse, grid)?
        };
        Ok(matrix)
    }

    /// Build a detector. The matched filter runs on the fast path; ZF and
    /// MMSE precompute a dense weight matrix.
    pub fn receiver(&self, receiver: Receiver) -> Result<ReceiverChain, Error> {
        let path = match receiver {
            Receiver::MatchedFilter => DetectPath::MatchedFilter(self.modem.clone()),
            other => DetectPath::Linear(Detector::new(&self.matrix()?, other)?),
        };
        Ok(ReceiverChain {
            path,
            oqam: self.is_oqam(),
            grid: *self.grid(),
        })
    }
}

/// `Re` parts to the in-phase columns, `Im` parts to the offset columns.
pub fn split_oqam(data: &ResourceGrid) -> RealGrid {
    let g = data.grid();
    let mut r = RealGrid::zeros(g);
    for k in 0..g.k {
        for m in 0..g.m {
            let v = data.get(k, m);
            r.set(k, 2 * m, v.re);
            r.set(k, 2 * m + 1, v.im);
        }
    }
    r
}

pub fn merge_oqam(r: &RealGrid, grid: &GridParams) -> ResourceGrid {
    ResourceGrid::from_fn(grid, |k, m| Complex64::new(r.get(k, 2 * m), r.get(k, 2 * m + 1)))
}

#[derive(Debug, Clone)]
enum DetectPath {
    MatchedFilter(Modem),
    Linear(Detector),
}

/// Prepared detector for repeated blocks.
#[derive(Debug, Clone)]
pub struct ReceiverChain {
    path: DetectPath,
    oqam: bool,
    grid: GridParams,
}

impl ReceiverChain {
    pub fn detect(&self, x: &BlockSignal) -> Result<ResourceGrid, Error> {
        let out = match (&self.path, self.oqam) {
            (DetectPath::MatchedFilter(m), false) => m.matched_filter(x)?,
            (DetectPath::MatchedFilter(m), true) => merge_oqam(&m.oqam_demap(x)?, &self.grid),
            (DetectPath::Linear(d), false) => d.detect(x)?,
            (DetectPath::Linear(d), true) => merge_oqam(&d.detect_real(x)?, &self.grid),
        };
        Ok(out)
    }
}
