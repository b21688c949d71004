//! Command-line front-end for the waveform engine.
//!
//! Every file-producing command also writes `<out>.manifest.json` recording
//! the arguments, seed, inputs and outputs of the run.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfdm_core::analysis::{self, ChannelProfile, MetricReport, ReceiverKind};
use gfdm_core::framing::{self, concat_frames, FramedBlock};
use gfdm_core::io::{self, IoError, IqMeta};
use gfdm_core::link::{Constellation, Transceiver};
use gfdm_core::modem::{BlockSignal, ResourceGrid};
use gfdm_core::params::{parse_rational, validate_config, Rational, ValidatedConfig};
use gfdm_core::presets::{self, PresetName, SizeHints};
use gfdm_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gfdm", version, about = "Generalized multicarrier waveform toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Preset catalogue
    #[command(subcommand)]
    Presets(PresetsCommand),
    /// Modulate a resource grid into a framed IQ stream
    Synth(SynthArgs),
    /// Detect resource grids from an IQ stream
    Demod(DemodArgs),
    /// Monte-Carlo symbol error rate over a channel
    Simulate(SimulateArgs),
    /// Pulse and signal metrics
    Analyze(AnalyzeArgs),
    /// Inter-user leakage across a guard band
    Guardband(GuardbandArgs),
}

#[derive(Debug, Subcommand)]
pub enum PresetsCommand {
    /// Print one JSON descriptor per line
    List,
}

/// Waveform source: a config file or a named preset with size hints.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Waveform config JSON
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named preset, e.g. ofdm, gfdm, fbmc-oqam
    #[arg(long)]
    pub preset: Option<PresetName>,
    /// Preset hint: subcarriers
    #[arg(long, requires = "preset")]
    pub k: Option<usize>,
    /// Preset hint: subsymbols
    #[arg(long, requires = "preset")]
    pub m: Option<usize>,
    /// Preset hint: prefix length in samples
    #[arg(long, requires = "preset")]
    pub cp: Option<usize>,
    /// Preset hint: pulse roll-off
    #[arg(long, requires = "preset")]
    pub rolloff: Option<f64>,
    /// Preset hint: time compression, e.g. 4/5
    #[arg(long, requires = "preset", value_parser = rational)]
    pub nu_t: Option<Rational>,
    /// Preset hint: frequency compression, e.g. 1/2
    #[arg(long, requires = "preset", value_parser = rational)]
    pub nu_f: Option<Rational>,
    /// Preset hint: silent subsymbols
    #[arg(long, requires = "preset")]
    pub silent: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstellationArg {
    Qpsk,
    Qam16,
}

impl From<ConstellationArg> for Constellation {
    fn from(c: ConstellationArg) -> Self {
        match c {
            ConstellationArg::Qpsk => Constellation::Qpsk,
            ConstellationArg::Qam16 => Constellation::Qam16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReceiverArg {
    Mf,
    Zf,
    Mmse,
}

impl From<ReceiverArg> for ReceiverKind {
    fn from(r: ReceiverArg) -> Self {
        match r {
            ReceiverArg::Mf => ReceiverKind::Mf,
            ReceiverArg::Zf => ReceiverKind::Zf,
            ReceiverArg::Mmse => ReceiverKind::Mmse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Awgn,
    Multipath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Ambiguity,
    Psd,
    Papr,
    Gram,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub waveform: ConfigArgs,
    /// Draw random symbols from this seed
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub random: Option<u64>,
    /// Grid CSV with columns block,k,m,re,im (block optional)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Number of random blocks
    #[arg(long, default_value_t = 1, conflicts_with = "data")]
    pub blocks: usize,
    #[arg(long, value_enum, default_value_t = ConstellationArg::Qpsk)]
    pub constellation: ConstellationArg,
    /// IQ output; the sidecar goes to <out>.meta.json
    #[arg(long)]
    pub out: PathBuf,
    /// Transmitted grid CSV [default: <out>.grid.csv]
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemodArgs {
    /// Waveform config [default: the one embedded in the sidecar]
    #[command(flatten)]
    pub waveform: ConfigArgs,
    /// IQ input with its .meta.json sidecar
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ReceiverArg::Mf)]
    pub receiver: ReceiverArg,
    /// Noise variance for the MMSE receiver
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,
    /// Slice estimates to this constellation
    #[arg(long, value_enum)]
    pub decide: Option<ConstellationArg>,
    /// Transmitted grid CSV to count symbol errors against
    #[arg(long, requires = "decide")]
    pub reference: Option<PathBuf>,
    /// Estimated grid CSV
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub waveform: ConfigArgs,
    #[arg(long, value_enum, default_value_t = ChannelArg::Awgn)]
    pub channel: ChannelArg,
    /// Tap CSV (re or re,im per line) for the multipath channel
    #[arg(long, required_if_eq("channel", "multipath"))]
    pub taps: Option<PathBuf>,
    /// Comma-separated SNR points in dB
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub snr: Vec<f64>,
    /// Blocks per SNR point
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ConstellationArg::Qpsk)]
    pub constellation: ConstellationArg,
    #[arg(long, value_enum, default_value_t = ReceiverArg::Mf)]
    pub receiver: ReceiverArg,
    /// Output prefix; writes <out>.csv and <out>.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Waveform config [default: the sidecar's when --input is given]
    #[command(flatten)]
    pub waveform: ConfigArgs,
    /// Measure this IQ stream instead of a synthetic one
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated metrics
    #[arg(long, value_enum, value_delimiter = ',', default_value = "papr,psd,gram")]
    pub metrics: Vec<Metric>,
    /// Blocks in the synthetic stream
    #[arg(long, default_value_t = 100)]
    pub blocks: usize,
    /// Seed for the synthetic stream
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Welch segment length [default: 4·S, capped at the stream length]
    #[arg(long)]
    pub segment: Option<usize>,
    /// Welch overlap [default: half the segment]
    #[arg(long)]
    pub overlap: Option<usize>,
    /// In-band subcarriers LO:HI (signed, inclusive) for the OOB ratio
    #[arg(long, value_parser = band, allow_hyphen_values = true)]
    pub band: Option<(i64, i64)>,
    /// JSON report; tables go to <out>.psd.csv, <out>.ccdf.csv, <out>.ambiguity.csv
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GuardbandArgs {
    /// User A waveform
    #[command(flatten)]
    pub waveform: ConfigArgs,
    /// User B config [default: same as user A]
    #[arg(long)]
    pub config_b: Option<PathBuf>,
    /// Empty subcarriers on each side of user B
    #[arg(long, default_value_t = 1)]
    pub guard: usize,
    /// Circular delay of user B in samples
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub offset: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report
    #[arg(long)]
    pub out: PathBuf,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("expected n or n/d, got {s:?}"))
}

fn band(s: &str) -> Result<(i64, i64), String> {
    let parse = |v: &str| v.trim().parse::<i64>().map_err(|e| format!("{v:?}: {e}"));
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty band {lo}:{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "cli.usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => EXIT_RUNTIME,
            _ => EXIT_VALIDATION,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Provenance record written next to the primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector; replaying it reproduces the outputs.
    pub args: Vec<String>,
    pub config_fingerprint: Option<String>,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub wall_time_s: f64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}

/// `dir/a.iq` → `dir/a.<ext>`.
fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

struct Outcome {
    fingerprint: Option<String>,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

/// Parse `args` (including the program name), run, and return the exit
/// code. Diagnostics go to stderr.
pub fn run_from_args<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { 0 };
        }
    };
    let text_args: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, &text_args, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, args: &[String], stdout: &mut dyn Write) -> Result<(), CliError> {
    let started = Instant::now();
    let (name, primary, outcome) = match cli.command {
        Command::Presets(PresetsCommand::List) => {
            presets_list(stdout)?;
            return Ok(());
        }
        Command::Synth(a) => ("synth", a.out.clone(), synth(&a)?),
        Command::Demod(a) => ("demod", a.out.clone(), demod(&a, stdout)?),
        Command::Simulate(a) => ("simulate", a.out.clone(), simulate(&a)?),
        Command::Analyze(a) => ("analyze", a.out.clone(), analyze(&a)?),
        Command::Guardband(a) => ("guardband", a.out.clone(), guardband(&a, stdout)?),
    };
    let manifest = RunManifest {
        command: name.to_string(),
        args: args.to_vec(),
        config_fingerprint: outcome.fingerprint,
        seed: outcome.seed,
        inputs: outcome.inputs,
        outputs: outcome.outputs,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    io::write_json(&manifest_path(&primary), &manifest)?;
    Ok(())
}

fn hints(w: &ConfigArgs) -> SizeHints {
    let mut h = SizeHints::default();
    if let Some(k) = w.k {
        h = h.k(k);
    }
    if let Some(m) = w.m {
        h = h.m(m);
    }
    if let Some(cp) = w.cp {
        h = h.cp(cp);
    }
    if let Some(r) = w.rolloff {
        h = h.rolloff(r);
    }
    if let Some(v) = w.nu_t {
        h = h.nu_t(v);
    }
    if let Some(v) = w.nu_f {
        h = h.nu_f(v);
    }
    if let Some(s) = w.silent {
        h = h.silent_subsymbols(s);
    }
    h
}

/// Config from `--config` or `--preset`, if either was given.
fn load_config(w: &ConfigArgs) -> Result<Option<(ValidatedConfig, Vec<PathBuf>)>, CliError> {
    if let Some(path) = &w.config {
        let cfg = io::read_config(path)?;
        let v = validate_config(&cfg).map_err(Error::from)?;
        return Ok(Some((v, vec![path.clone()])));
    }
    if let Some(name) = w.preset {
        return Ok(Some((presets::preset_config(name, &hints(w))?, Vec::new())));
    }
    Ok(None)
}

fn require_config(w: &ConfigArgs) -> Result<(ValidatedConfig, Vec<PathBuf>), CliError> {
    load_config(w)?.ok_or_else(|| usage("one of --config or --preset is required"))
}

/// Config from the flags, else from the sidecar of `iq`. A config given on
/// the command line must match the sidecar fingerprint.
fn config_for_iq(w: &ConfigArgs, iq: &Path, meta: &IqMeta) -> Result<(ValidatedConfig, Vec<PathBuf>), CliError> {
    if let Some((cfg, inputs)) = load_config(w)? {
        if cfg.config().fingerprint() != meta.config_fingerprint {
            return Err(IoError::Mismatch {
                path: iq.to_path_buf(),
                detail: "config fingerprint differs from the sidecar".into(),
            }
            .into());
        }
        return Ok((cfg, inputs));
    }
    let cfg = meta
        .config
        .as_ref()
        .ok_or_else(|| usage(format!("{} carries no config; pass --config or --preset", iq.display())))?;
    Ok((validate_config(cfg).map_err(Error::from)?, Vec::new()))
}

fn presets_list(stdout: &mut dyn Write) -> Result<(), CliError> {
    for name in PresetName::ALL {
        let line = serde_json::to_string(&presets::descriptor(name)).expect("descriptor serializes");
        writeln!(stdout, "{line}").map_err(|e| usage(format!("stdout: {e}")))?;
    }
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<Outcome, CliError> {
    let (cfg, mut inputs) = require_config(&a.waveform)?;
    let tr = Transceiver::new(&cfg)?;
    let grids = match (&a.data, a.random) {
        (Some(path), _) => {
            inputs.push(path.clone());
            let grids = io::read_grids_csv(path, tr.grid())?;
            if grids.is_empty() {
                return Err(usage(format!("{} holds no symbols", path.display())));
            }
            grids
        }
        (None, Some(seed)) => {
            if a.blocks == 0 {
                return Err(usage("--blocks must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..a.blocks).map(|_| tr.random_data(a.constellation.into(), &mut rng)).collect()
        }
        (None, None) => return Err(usage("one of --random or --data is required")),
    };
    let frames = grids
        .iter()
        .map(|d| tr.transmit_framed(d))
        .collect::<Result<Vec<FramedBlock>, Error>>()?;
    let stream = concat_frames(&frames);
    io::write_iq(&a.out, &stream.samples)?;
    let meta = IqMeta {
        sample_count: stream.samples.len(),
        config_fingerprint: cfg.config().fingerprint(),
        sample_rate_hz: cfg.config().sample_rate_hz,
        blocks: stream.blocks,
        config: Some(cfg.config().clone()),
    };
    io::write_meta(&a.out, &meta)?;
    let grid_out = a.grid_out.clone().unwrap_or_else(|| sibling(&a.out, "grid.csv"));
    io::write_grids_csv(&grid_out, &grids)?;
    Ok(Outcome {
        fingerprint: Some(meta.config_fingerprint),
        seed: a.random,
        inputs,
        outputs: vec![a.out.clone(), io::meta_path(&a.out), grid_out],
    })
}

#[derive(Debug, Serialize)]
struct DemodSummary {
    blocks: usize,
    symbols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    symbol_errors: Option<usize>,
}

fn demod(a: &DemodArgs, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let (samples, meta) = io::read_iq_with_meta(&a.input)?;
    let (cfg, mut inputs) = config_for_iq(&a.waveform, &a.input, &meta)?;
    inputs.insert(0, a.input.clone());
    let tr = Transceiver::new(&cfg)?;
    let s = tr.grid().s;
    let cp = cfg.config().cp_length;
    let stream = framing::FrameStream {
        blocks: if meta.blocks.is_empty() {
            let len = s + cp;
            if samples.len() % len != 0 {
                return Err(usage(format!("{} samples are not a whole number of {len}-sample frames", samples.len())));
            }
            (0..samples.len() / len)
                .map(|i| framing::BlockBoundary { start: i * len, cp_length: cp, len })
                .collect()
        } else {
            meta.blocks.clone()
        },
        samples,
    };
    let chain = tr.receiver(ReceiverKind::from(a.receiver).receiver(a.noise_var))?;
    let mut estimates = Vec::with_capacity(stream.blocks.len());
    for frame in stream.frames() {
        let block: BlockSignal = framing::remove_cp(&frame, s).map_err(Error::from)?;
        let mut est = chain.detect(&block)?;
        if let Some(c) = a.decide {
            let c = Constellation::from(c);
            for v in est.data_mut() {
                *v = c.decide(*v);
            }
        }
        estimates.push(est);
    }
    io::write_grids_csv(&a.out, &estimates)?;

    let active = tr.active_positions();
    let mut summary = DemodSummary {
        blocks: estimates.len(),
        symbols: estimates.len() * active.len(),
        symbol_errors: None,
    };
    if let Some(path) = &a.reference {
        inputs.push(path.clone());
        let reference = io::read_grids_csv(path, tr.grid())?;
        if reference.len() != estimates.len() {
            return Err(usage(format!(
                "reference holds {} blocks, stream holds {}",
                reference.len(),
                estimates.len()
            )));
        }
        let errors = estimates
            .iter()
            .zip(&reference)
            .map(|(e, r): (&ResourceGrid, &ResourceGrid)| {
                active.iter().filter(|&&(k, m)| (e.get(k, m) - r.get(k, m)).norm() > 1e-9).count()
            })
            .sum();
        summary.symbol_errors = Some(errors);
    }
    let line = serde_json::to_string(&summary).expect("summary serializes");
    writeln!(stdout, "{line}").map_err(|e| usage(format!("stdout: {e}")))?;
    Ok(Outcome {
        fingerprint: Some(meta.config_fingerprint),
        seed: None,
        inputs,
        outputs: vec![a.out.clone()],
    })
}

/// Worker pool sized by `GFDM_THREADS` when set.
fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("GFDM_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("GFDM_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| usage(format!("thread pool: {e}")))
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let (cfg, mut inputs) = require_config(&a.waveform)?;
    let profile = match a.channel {
        ChannelArg::Awgn => ChannelProfile::Awgn,
        ChannelArg::Multipath => {
            let path = a.taps.as_ref().ok_or_else(|| usage("--taps is required for multipath"))?;
            inputs.push(path.clone());
            ChannelProfile::Multipath { taps: io::read_taps_csv(path)? }
        }
    };
    let report = thread_pool()?.install(|| {
        analysis::run_ser(
            &cfg,
            &profile,
            a.receiver.into(),
            a.constellation.into(),
            &a.snr,
            a.trials,
            a.seed,
        )
    })?;
    let (csv, json) = (sibling(&a.out, "csv"), sibling(&a.out, "json"));
    io::write_ser_csv(&csv, &report)?;
    io::write_json(&json, &report)?;
    Ok(Outcome {
        fingerprint: Some(report.config_fingerprint),
        seed: Some(a.seed),
        inputs,
        outputs: vec![csv, json],
    })
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    config_fingerprint: String,
    /// `iq` or `synthetic`.
    source: &'static str,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    papr_999_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ambiguity_peak_offgrid: Option<f64>,
    metrics: MetricReport,
}

fn analyze(a: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let (cfg, samples, mut inputs, source) = match &a.input {
        Some(path) => {
            let (samples, meta) = io::read_iq_with_meta(path)?;
            let (cfg, mut inputs) = config_for_iq(&a.waveform, path, &meta)?;
            inputs.insert(0, path.clone());
            (cfg, Some(samples), inputs, "iq")
        }
        None => {
            let (cfg, inputs) = require_config(&a.waveform)?;
            (cfg, None, inputs, "synthetic")
        }
    };
    let tr = Transceiver::new(&cfg)?;
    let frame_len = tr.grid().s + cfg.config().cp_length;
    let samples = match samples {
        Some(s) => s,
        None => {
            if a.blocks == 0 {
                return Err(usage("--blocks must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut out = Vec::with_capacity(a.blocks * frame_len);
            for _ in 0..a.blocks {
                let d = tr.random_data(Constellation::Qpsk, &mut rng);
                out.extend(tr.transmit_framed(&d)?.samples);
            }
            out
        }
    };

    let mut report = AnalyzeReport {
        config_fingerprint: cfg.config().fingerprint(),
        source,
        samples: samples.len(),
        papr_999_db: None,
        ambiguity_peak_offgrid: None,
        metrics: MetricReport::default(),
    };
    let mut outputs = vec![a.out.clone()];
    if a.metrics.contains(&Metric::Papr) {
        let values = analysis::papr(&samples, frame_len).map_err(Error::from)?;
        let ccdf = analysis::ccdf(&values);
        let path = sibling(&a.out, "ccdf.csv");
        io::write_ccdf_csv(&path, &ccdf)?;
        outputs.push(path);
        report.papr_999_db = analysis::percentile(&values, 99.9);
        report.metrics.papr_db = Some(values);
        report.metrics.ccdf = Some(ccdf);
    }
    if a.metrics.contains(&Metric::Psd) {
        let segment = a.segment.unwrap_or(4 * tr.grid().s).min(samples.len());
        let overlap = a.overlap.unwrap_or(segment / 2);
        let psd = analysis::psd(&samples, segment, overlap).map_err(Error::from)?;
        if let Some((lo, hi)) = a.band {
            let oob = analysis::oob_power(&psd, analysis::allocation_band(tr.grid(), lo, hi));
            report.metrics.oob_db = Some(oob.map_err(Error::from)?);
        }
        let path = sibling(&a.out, "psd.csv");
        io::write_psd_csv(&path, &psd)?;
        outputs.push(path);
        report.metrics.psd = Some(psd);
    }
    if a.metrics.contains(&Metric::Ambiguity) {
        let surface = analysis::ambiguity(tr.pulse(), tr.grid()).map_err(Error::from)?;
        // Largest magnitude on the full-symbol lattice away from the origin
        // and its cyclic images.
        let (two_m, k_len) = (2 * tr.grid().m as i64, tr.grid().k as i64);
        report.ambiguity_peak_offgrid = surface
            .entries()
            .filter(|&(h, k, _)| h % 2 == 0 && (h.rem_euclid(two_m) != 0 || k.rem_euclid(k_len) != 0))
            .map(|(_, _, v)| v.norm())
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        let path = sibling(&a.out, "ambiguity.csv");
        io::write_ambiguity_csv(&path, &surface)?;
        outputs.push(path);
    }
    if a.metrics.contains(&Metric::Gram) {
        let metrics = analysis::orthogonality_metrics(&tr.matrix()?);
        report.metrics = report.metrics.with_orthogonality(&metrics);
    }
    io::write_json(&a.out, &report)?;
    inputs.dedup();
    Ok(Outcome {
        fingerprint: Some(report.config_fingerprint),
        seed: a.input.is_none().then_some(a.seed),
        inputs,
        outputs,
    })
}

fn guardband(a: &GuardbandArgs, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let (cfg_a, mut inputs) = require_config(&a.waveform)?;
    let cfg_b = match &a.config_b {
        Some(path) => {
            inputs.push(path.clone());
            validate_config(&io::read_config(path)?).map_err(Error::from)?
        }
        None => cfg_a.clone(),
    };
    let report = analysis::guard_band_leakage(&cfg_a, &cfg_b, a.guard, a.offset, a.seed)?;
    io::write_json(&a.out, &report)?;
    writeln!(stdout, "leakage {:.2} dB", report.leakage_db).map_err(|e| usage(format!("stdout: {e}")))?;
    Ok(Outcome {
        fingerprint: Some(cfg_a.config().fingerprint()),
        seed: Some(a.seed),
        inputs,
        outputs: vec![a.out.clone()],
    })
}
