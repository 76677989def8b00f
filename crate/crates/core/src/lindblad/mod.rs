//! Lindblad master equations: generator assembly, time integration and
//! analysis of the recorded observables.

mod generator;
mod integrate;
mod series;
mod sparse;

pub use generator::{master_rhs, DissipatorKind, DissipatorSpec, Generator, Hamiltonian, Scratch};
pub use integrate::{evolve, evolve_with, Evolution, IntegratorConfig, Method, Observable};
pub use series::{extract_period, ExtremumKind, PeriodEstimate, TimeSeries};

use thiserror::Error;

use crate::operator::{HilbertSpace, OperatorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LindbladError {
    #[error("operator acts on {0}, which differs from the generator space")]
    SpaceMismatch(HilbertSpace),
    #[error("invalid dissipator: {0}")]
    InvalidDissipator(String),
    #[error("two-photon dissipator #{index} has no conjugate partner (o†, μ*)")]
    UnpairedTwoPhoton { index: usize },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("integration failed at t = {t}: step size fell to {h_min:e}")]
    StepUnderflow { t: f64, h_min: f64 },
    #[error("trace {0} shows no oscillation")]
    NoOscillation(String),
    #[error("no trace named {0}")]
    UnknownTrace(String),
    #[error("invalid time series: {0}")]
    InvalidSeries(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}
