//! Series tables and run manifests.
//!
//! Series tables are comma-separated with a header row and one row per
//! recorded time. Numbers are written in plain decimal notation with twelve
//! significant digits. Manifests are TOML.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::preset::ExperimentPreset;
use super::ExperimentError;
use crate::density::StateDiagnostics;
use crate::lindblad::{PeriodEstimate, TimeSeries};
use crate::model::DerivedParams;

/// Significant digits of every number written to a table.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Values below this magnitude are written with absolute resolution `1e−24`.
const MAX_DECIMALS: usize = 24;

pub const SERIES_FILE: &str = "series.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Decimal text with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i64;
    let decimals = (SIGNIFICANT_DIGITS as i64 - 1 - exp).clamp(0, MAX_DECIMALS as i64) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit; one decimal fewer restores the count
    let digits = s.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
    let significant = digits.trim_start_matches('0').len();
    if significant > SIGNIFICANT_DIGITS && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// Write `header` and rows of numbers as a comma-separated table.
pub fn write_table<W: Write>(
    mut w: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_sig).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Write a time series as `t,<trace names…>`.
pub fn write_series_table<W: Write>(w: W, series: &TimeSeries) -> std::io::Result<()> {
    let mut header = vec!["t"];
    header.extend(series.names());
    let rows = (0..series.len()).map(|i| {
        let mut row = vec![series.times()[i]];
        row.extend(series.traces().iter().map(|(_, v)| v[i]));
        row
    });
    write_table(w, &header, rows)
}

/// Parse a table written by [`write_series_table`].
pub fn parse_series_table(text: &str) -> Result<TimeSeries, ExperimentError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| ExperimentError::Parse("empty table".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    if header.first() != Some(&"t") {
        return Err(ExperimentError::Parse("first column must be t".into()));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (n, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(ExperimentError::Parse(format!(
                "row {} has {} cells, header has {}",
                n + 1,
                cells.len(),
                header.len()
            )));
        }
        for (col, cell) in columns.iter_mut().zip(cells) {
            let v = cell
                .trim()
                .parse::<f64>()
                .map_err(|e| ExperimentError::Parse(format!("row {}: {cell:?}: {e}", n + 1)))?;
            col.push(v);
        }
    }
    let mut columns = columns.into_iter();
    let times = columns.next().unwrap_or_default();
    let traces = header[1..]
        .iter()
        .map(|h| h.to_string())
        .zip(columns)
        .collect();
    Ok(TimeSeries::new(times, traces)?)
}

pub fn read_series_table(path: &Path) -> Result<TimeSeries, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    parse_series_table(&text)
}

/// Summary of integrator behaviour and state validity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunStats {
    pub rows: usize,
    pub steps: usize,
    pub rejected_steps: usize,
    pub wall_time_s: f64,
    pub trace_err: f64,
    pub herm_err: f64,
    /// Absent when positivity was not checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_eig: Option<f64>,
    pub state_valid: bool,
}

impl RunStats {
    pub fn new(
        rows: usize,
        steps: usize,
        rejected_steps: usize,
        wall_time_s: f64,
        d: &StateDiagnostics,
    ) -> Self {
        Self {
            rows,
            steps,
            rejected_steps,
            wall_time_s,
            trace_err: d.trace_err,
            herm_err: d.herm_err,
            min_eig: d.min_eig.is_finite().then_some(d.min_eig),
            state_valid: d.passed,
        }
    }
}

/// Period read from the preset's period trace, when one was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodSummary {
    pub trace: String,
    pub period: f64,
    pub uncertainty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<f64>,
}

/// Everything needed to reproduce and audit a run.
///
/// The `experiment` table is a complete run description; passing the manifest
/// back with `--config` repeats the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub code_version: String,
    pub series_file: String,
    pub stats: RunStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<PeriodSummary>,
    pub derived: DerivedSummary,
    pub experiment: ExperimentPreset,
}

/// Flat copy of [`DerivedParams`] for the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedSummary {
    pub delta_s: f64,
    pub omega_p: f64,
    pub n_s: f64,
    pub m_s_re: f64,
    pub m_s_im: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_eff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_eff_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
}

impl From<DerivedParams> for DerivedSummary {
    fn from(d: DerivedParams) -> Self {
        Self {
            delta_s: d.delta_s,
            omega_p: d.omega_p_amp,
            n_s: d.n_s,
            m_s_re: d.m_s.re,
            m_s_im: d.m_s.im,
            g_eff: d.g_eff,
            g_eff_prime: d.g_eff_prime,
            delta_c_prime: d.delta_c_prime,
            delta_e: d.delta_e,
        }
    }
}

impl PeriodSummary {
    pub fn new(trace: &str, est: &PeriodEstimate, analytic: Option<f64>) -> Self {
        Self {
            trace: trace.to_string(),
            period: est.period,
            uncertainty: est.uncertainty,
            analytic,
        }
    }
}

pub fn code_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Serialize any manifest-like value as TOML.
pub fn to_toml<T: Serialize>(value: &T) -> Result<String, ExperimentError> {
    toml::to_string(value).map_err(|e| ExperimentError::Serialize(e.to_string()))
}

/// Create `dir` and write `name` inside it.
pub fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| ExperimentError::io(&path, e))?;
    Ok(path)
}

/// Write a series table into `dir`.
pub fn write_series_file(
    dir: &Path,
    name: &str,
    series: &TimeSeries,
) -> Result<PathBuf, ExperimentError> {
    let mut buf = Vec::new();
    write_series_table(&mut buf, series).map_err(|e| ExperimentError::io(dir, e))?;
    write_file(dir, name, &buf)
}

/// Read a run description from a config file or a previous manifest.
pub fn load_config(path: &Path) -> Result<ExperimentPreset, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    parse_config(&text)
}

/// Parse a run description. Files with an `experiment` table are read as manifests.
pub fn parse_config(text: &str) -> Result<ExperimentPreset, ExperimentError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ExperimentError::Parse(e.to_string()))?;
    if table.contains_key("experiment") {
        let m: RunManifest =
            toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        Ok(m.experiment)
    } else {
        toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))
    }
}
