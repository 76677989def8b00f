//! Figure presets, scans and file output.
//!
//! A preset resolves a named figure panel into an [`ExperimentPreset`]: numeric
//! parameters satisfying the panel's detuning constraints, a model, truncations,
//! an initial product state and an integrator. Runs write a series table and a
//! TOML manifest that can be fed back as a config.

mod analysis;
mod build;
mod output;
mod preset;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use analysis::{
    apply_overrides, classify_steady_state, compare_preset, compare_to_dir, default_kappa1_grid,
    enhancement_scan, geometric_grid, kappa1_sweep, preset_analytic_period, run_to_dir,
    steady_state_report, write_scan, write_sweep, RunOutput, RunOverrides, ScanFamily, ScanReport,
    ScanRow, SteadyStateClass, SteadyStateReport, COMPARE_TOLERANCE,
};
pub use build::{build_run, execute, model_space, BuiltRun, RunResult};
pub use output::{
    format_sig, load_config, parse_config, parse_series_table, read_series_table, to_toml,
    write_series_table, write_table, DerivedSummary, PeriodSummary, RunManifest, RunStats,
    MANIFEST_FILE, SERIES_FILE, SIGNIFICANT_DIGITS,
};
pub use preset::{
    analytic_period, caption_residuals, check_caption_constraints, counter_family_params,
    etd_config, propagator_config, resolve_preset, rotating_family_params, AtomLevel, Dissipation,
    ExperimentPreset, Family, InitialState, ModelKind, ObservableKind, PresetName, Reservoir,
    Truncation, FIG2B_SCALED_RP, FIG3B_T_FINAL, SCAN_DISSIPATION,
};

use crate::effective::EffectiveError;
use crate::lindblad::LindbladError;
use crate::master::MasterError;
use crate::model::ModelError;
use crate::operator::OperatorError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("constraint {constraint} violated (relative residual {residual:e})")]
    Constraint {
        constraint: &'static str,
        residual: f64,
    },
    #[error("observable {observable} is not available for model {model:?}")]
    UnsupportedObservable {
        observable: &'static str,
        model: ModelKind,
    },
    #[error("run has not reached a steady state (variation {variation:e} over the window)")]
    NotSteady { variation: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("serialization error: {0}")]
    Serialize(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Effective(#[from] EffectiveError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

impl ExperimentError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
