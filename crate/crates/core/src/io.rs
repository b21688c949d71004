//! File formats: raw IQ with a JSON sidecar, CSV grids, pulses, taps and
//! plot-ready reports.
//!
//! IQ files are interleaved little-endian `f64` pairs with no header. CSV
//! files use `,` separators, `.` decimals and a header row.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{AmbiguitySurface, CcdfPoint, Psd, SerReport};
use crate::framing::BlockBoundary;
use crate::modem::ResourceGrid;
use crate::params::{GridParams, WaveformConfig};
use crate::pulses::PrototypePulse;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {len} bytes is not a whole number of complex f64 samples")]
    TruncatedIq { path: PathBuf, len: usize },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
    #[error("{path}: {detail}")]
    Mismatch { path: PathBuf, detail: String },
}

impl IoError {
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Read { .. } => "io.read",
            IoError::Write { .. } => "io.write",
            IoError::TruncatedIq { .. } => "io.truncated_iq",
            IoError::Malformed { .. } => "io.malformed",
            IoError::Mismatch { .. } => "io.mismatch",
        }
    }

    /// Bad or missing input, as opposed to a failure while writing results.
    pub fn is_validation(&self) -> bool {
        !matches!(self, IoError::Write { .. })
    }
}

fn read_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Read {
        path: path.to_path_buf(),
        source,
    }
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Write {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(path: &Path, detail: impl ToString) -> IoError {
    IoError::Malformed {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

fn csv_write_err(path: &Path, e: csv::Error) -> IoError {
    IoError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

pub fn write_iq(path: &Path, samples: &[Complex64]) -> Result<(), IoError> {
    let mut bytes = Vec::with_capacity(samples.len() * 16);
    for v in samples {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, bytes).map_err(write_err(path))
}

pub fn read_iq(path: &Path) -> Result<Vec<Complex64>, IoError> {
    let bytes = fs::read(path).map_err(read_err(path))?;
    if bytes.len() % 16 != 0 {
        return Err(IoError::TruncatedIq {
            path: path.to_path_buf(),
            len: bytes.len(),
        });
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8-byte chunk"));
    Ok(bytes
        .chunks_exact(16)
        .map(|c| Complex64::new(f(&c[..8]), f(&c[8..])))
        .collect())
}

/// Sidecar written next to every IQ file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqMeta {
    pub sample_count: usize,
    pub config_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate_hz: Option<f64>,
    #[serde(default)]
    pub blocks: Vec<BlockBoundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<WaveformConfig>,
}

/// `dir/name.iq` → `dir/name.meta.json`.
pub fn meta_path(iq_path: &Path) -> PathBuf {
    iq_path.with_extension("meta.json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| IoError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(write_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(read_err(path))?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e))
}

pub fn read_config(path: &Path) -> Result<WaveformConfig, IoError> {
    let text = fs::read_to_string(path).map_err(read_err(path))?;
    WaveformConfig::from_json(&text).map_err(|e| malformed(path, e))
}

pub fn write_meta(iq_path: &Path, meta: &IqMeta) -> Result<(), IoError> {
    write_json(&meta_path(iq_path), meta)
}

/// Read an IQ file and its sidecar, checking the sample count.
pub fn read_iq_with_meta(iq_path: &Path) -> Result<(Vec<Complex64>, IqMeta), IoError> {
    let samples = read_iq(iq_path)?;
    let meta: IqMeta = read_json(&meta_path(iq_path))?;
    if meta.sample_count != samples.len() {
        return Err(IoError::Mismatch {
            path: iq_path.to_path_buf(),
            detail: format!(
                "sidecar announces {} samples, file holds {}",
                meta.sample_count,
                samples.len()
            ),
        });
    }
    Ok((samples, meta))
}

#[derive(Serialize, Deserialize)]
struct GridRow {
    #[serde(default)]
    block: usize,
    k: usize,
    m: usize,
    re: f64,
    im: f64,
}

/// One row per `(k, m)`, subcarrier-major.
pub fn write_grid_csv(path: &Path, grid: &ResourceGrid) -> Result<(), IoError> {
    write_grids_csv(path, std::slice::from_ref(grid))
}

/// Several blocks in one file, ordered by block then `(k, m)`.
pub fn write_grids_csv(path: &Path, grids: &[ResourceGrid]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    for (block, grid) in grids.iter().enumerate() {
        let g = grid.grid();
        for k in 0..g.k {
            for m in 0..g.m {
                let v = grid.get(k, m);
                w.serialize(GridRow { block, k, m, re: v.re, im: v.im })
                    .map_err(|e| csv_write_err(path, e))?;
            }
        }
    }
    w.flush().map_err(write_err(path))
}

/// Rows may come in any order; missing positions read as zero. Fails if the
/// file holds more than one block.
pub fn read_grid_csv(path: &Path, params: &GridParams) -> Result<ResourceGrid, IoError> {
    let mut grids = read_grids_csv(path, params)?;
    match grids.len() {
        0 => Ok(ResourceGrid::zeros(params)),
        1 => Ok(grids.remove(0)),
        n => Err(malformed(path, format!("expected one block, found {n}"))),
    }
}

/// The `block` column is optional and defaults to 0.
pub fn read_grids_csv(path: &Path, params: &GridParams) -> Result<Vec<ResourceGrid>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| malformed(path, e))?;
    let mut grids = Vec::new();
    for row in r.deserialize::<GridRow>() {
        let row = row.map_err(|e| malformed(path, e))?;
        if row.k >= params.k || row.m >= params.m {
            return Err(malformed(
                path,
                format!("position ({}, {}) outside {}x{} grid", row.k, row.m, params.k, params.m),
            ));
        }
        while grids.len() <= row.block {
            grids.push(ResourceGrid::zeros(params));
        }
        grids[row.block].set(row.k, row.m, Complex64::new(row.re, row.im));
    }
    Ok(grids)
}

pub fn write_pulse_csv(path: &Path, pulse: &PrototypePulse) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    w.write_record(["index", "re", "im"]).map_err(|e| csv_write_err(path, e))?;
    for (i, v) in pulse.samples().iter().enumerate() {
        w.serialize((i, v.re, v.im)).map_err(|e| csv_write_err(path, e))?;
    }
    w.flush().map_err(write_err(path))
}

/// `re,im` per line. A leading non-numeric line is taken as a header.
pub fn read_taps_csv(path: &Path) -> Result<Vec<Complex64>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| malformed(path, e))?;
    let mut taps = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| malformed(path, e))?;
        let parsed: Option<Vec<f64>> = record.iter().map(|f| f.parse().ok()).collect();
        match parsed.as_deref() {
            Some([re, im]) => taps.push(Complex64::new(*re, *im)),
            Some([re]) => taps.push(Complex64::new(*re, 0.0)),
            None if line == 0 => continue,
            _ => return Err(malformed(path, format!("line {}: expected re,im", line + 1))),
        }
    }
    if taps.is_empty() {
        return Err(malformed(path, "no taps"));
    }
    Ok(taps)
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_write_err(path, e))?;
    }
    w.flush().map_err(write_err(path))
}

pub fn write_ser_csv(path: &Path, report: &SerReport) -> Result<(), IoError> {
    write_rows(path, &report.points)
}

pub fn write_psd_csv(path: &Path, psd: &Psd) -> Result<(), IoError> {
    #[derive(Serialize)]
    struct Row {
        frequency: f64,
        density: f64,
        density_db: f64,
    }
    write_rows(
        path,
        psd.frequencies.iter().zip(&psd.density).map(|(&frequency, &density)| Row {
            frequency,
            density,
            density_db: 10.0 * density.max(1e-300).log10(),
        }),
    )
}

pub fn write_ambiguity_csv(path: &Path, surface: &AmbiguitySurface) -> Result<(), IoError> {
    #[derive(Serialize)]
    struct Row {
        half_step: i64,
        subcarrier: i64,
        re: f64,
        im: f64,
        abs: f64,
    }
    write_rows(
        path,
        surface.entries().map(|(half_step, subcarrier, v)| Row {
            half_step,
            subcarrier,
            re: v.re,
            im: v.im,
            abs: v.norm(),
        }),
    )
}

pub fn write_ccdf_csv(path: &Path, points: &[CcdfPoint]) -> Result<(), IoError> {
    write_rows(path, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_config;

    #[test]
    fn iq_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.iq");
        let x = vec![Complex64::new(0.1, -2.5e-300), Complex64::new(f64::MAX, 3.0)];
        write_iq(&path, &x).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 32);
        assert_eq!(read_iq(&path).unwrap(), x);
        fs::write(&path, [0u8; 20]).unwrap();
        assert!(matches!(read_iq(&path), Err(IoError::TruncatedIq { len: 20, .. })));
    }

    #[test]
    fn meta_sidecar_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.iq");
        assert_eq!(meta_path(&path), dir.path().join("a.meta.json"));
        write_iq(&path, &[Complex64::new(1.0, 0.0)]).unwrap();
        let mut meta = IqMeta {
            sample_count: 1,
            config_fingerprint: "ab".into(),
            sample_rate_hz: None,
            blocks: vec![],
            config: None,
        };
        write_meta(&path, &meta).unwrap();
        assert_eq!(read_iq_with_meta(&path).unwrap().1, meta);
        meta.sample_count = 2;
        write_meta(&path, &meta).unwrap();
        assert_eq!(read_iq_with_meta(&path).unwrap_err().code(), "io.mismatch");
    }

    #[test]
    fn grid_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let g = *validate_config(&WaveformConfig::new(2, 3, 2, 3)).unwrap().grid();
        let grid = ResourceGrid::from_fn(&g, |k, m| Complex64::new(k as f64 + 0.1, m as f64 / 3.0));
        write_grid_csv(&path, &grid).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("block,k,m,re,im\n0,0,0,0.1,0.0\n"));
        assert_eq!(read_grid_csv(&path, &g).unwrap(), grid);

        let other = ResourceGrid::from_fn(&g, |k, m| Complex64::new(-(k as f64), m as f64));
        write_grids_csv(&path, &[grid.clone(), other.clone()]).unwrap();
        assert_eq!(read_grids_csv(&path, &g).unwrap(), vec![grid, other]);
        assert!(read_grid_csv(&path, &g).is_err());

        fs::write(&path, "k,m,re,im\n1,2,0.5,-1\n").unwrap();
        assert_eq!(read_grid_csv(&path, &g).unwrap().get(1, 2), Complex64::new(0.5, -1.0));
    }

    #[test]
    fn taps_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "re,im\n1,0\n0.5, -0.5\n").unwrap();
        assert_eq!(
            read_taps_csv(&path).unwrap(),
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, -0.5)]
        );
        fs::write(&path, "1,0\n0.25,0\n").unwrap();
        assert_eq!(read_taps_csv(&path).unwrap().len(), 2);
        fs::write(&path, "1,0\nx,y\n").unwrap();
        assert_eq!(read_taps_csv(&path).unwrap_err().code(), "io.malformed");
    }
}
