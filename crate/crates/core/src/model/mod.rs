//! Parameters, derived quantities and Hamiltonians of the atom–two-cavity model.

mod hamiltonian;
mod params;

pub use hamiltonian::{
    excitation_number, h_eff_1, h_eff_1_parts, h_eff_1_static, h_eff_2, hamiltonian_lab,
    hamiltonian_squeezed, lab_photon_observable, parity_operator, HeffParts, ModelOperators,
    ReducedOperators, Rwa,
};
pub use params::{
    effective_detunings_and_coupling_1, g_eff_prime, lab_detuning, lab_reservoir_stats,
    pump_from_squeeze, reservoir_stats, solve_resonance, solve_resonance_delta_c,
    squeeze_from_pump, squeezed_detuning, thermal_cutoff, thermal_tail_mass, DerivedParams,
    ResonanceRoots, RotatingCoupling, SystemParams,
};

use thiserror::Error;

use crate::operator::{HilbertSpace, OperatorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("pump above threshold: |omega_p| = {omega_p} must be below |delta_a| = {delta_a}")]
    AboveThreshold { omega_p: f64, delta_a: f64 },
    #[error("degenerate detuning {name} = {value}")]
    DegenerateDetuning { name: &'static str, value: f64 },
    #[error("resonance condition has no real root (discriminant {discriminant})")]
    NoResonance { discriminant: f64 },
    #[error("squeezed-frame Hamiltonian only supports theta_p = 0, got {theta_p}")]
    UnsupportedPhase { theta_p: f64 },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("expected a space of the form {expected}, got {found}")]
    WrongSpace {
        expected: &'static str,
        found: HilbertSpace,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}
