//! Squeezing-enhanced coupled-cavity QED.
//!
//! A two-level atom sits in a parametrically driven cavity `a` that is
//! photon-hopping coupled to an auxiliary cavity `c`. Squeezing the primary
//! mode boosts the effective atom–`c` coupling mediated by virtual photons in
//! `a`. The crate provides:
//!
//! * [`operator`]: dense operators on tensor-product Fock spaces,
//! * [`model`]: parameters, derived quantities and Hamiltonians,
//! * [`lindblad`]: master-equation integration and time-series analysis,
//! * [`master`]: the model's master equations in the lab and squeezed frames,
//! * [`effective`]: adiabatic elimination of the squeezed mode,
//! * [`experiment`]: figure presets, scans and file output.
//!
//! Frequencies are in units of the atom–cavity coupling `g`, times in `1/g`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod effective;
pub mod experiment;
pub mod lindblad;
pub mod master;
pub mod model;
pub mod operator;

pub use density::{expectation, validate_state, DensityMatrix, StateDiagnostics};
pub use model::{DerivedParams, SystemParams};
pub use operator::{
    atom_op, basis_product_state, embed, fock_destroy, AtomOp, HilbertSpace, Operator,
    OperatorError, StateVector,
};
