//! Turning a preset into a master equation, an initial state and observables.

use std::time::Instant;

use super::preset::{ExperimentPreset, ModelKind, ObservableKind};
use super::ExperimentError;
use crate::density::DensityMatrix;
use crate::effective::effective_master_equation;
use crate::lindblad::{evolve, DissipatorSpec, Evolution, Hamiltonian, Observable};
use crate::master::{lab_master_equation, squeezed_master_equation};
use crate::model::{
    h_eff_1_static, h_eff_2, lab_photon_observable, ModelOperators, ReducedOperators, Rwa,
};
use crate::operator::{basis_product_state, HilbertSpace};

/// Everything [`evolve`] needs for one preset.
#[derive(Debug, Clone)]
pub struct BuiltRun {
    pub hamiltonian: Hamiltonian,
    pub dissipators: Vec<DissipatorSpec>,
    pub rho0: DensityMatrix,
    pub observables: Vec<Observable>,
}

impl BuiltRun {
    pub fn space(&self) -> &HilbertSpace {
        self.rho0.space()
    }
}

/// Hilbert space the preset's model acts on.
pub fn model_space(preset: &ExperimentPreset) -> Result<HilbertSpace, ExperimentError> {
    let t = preset.truncation;
    let space = if preset.model.is_reduced() {
        HilbertSpace::atom_mode(t.n_c)?
    } else {
        HilbertSpace::atom_two_modes(t.n_a, t.n_c)?
    };
    Ok(space)
}

/// Assemble the master equation, initial state and observables of a preset.
pub fn build_run(preset: &ExperimentPreset) -> Result<BuiltRun, ExperimentError> {
    let p = &preset.params;
    p.validate()?;
    let space = model_space(preset)?;
    let init = preset.initial;

    if preset.model.is_reduced() {
        if init.n_a != 0 {
            return Err(ExperimentError::InvalidArgument(
                "reduced models have no a_s mode; initial n_a must be 0".into(),
            ));
        }
        let o = ReducedOperators::new(&space)?;
        let (hamiltonian, dissipators) = match preset.model {
            ModelKind::EffectiveAppendix => effective_master_equation(p, &space)?,
            kind => {
                let h = if kind == ModelKind::Heff1 {
                    h_eff_1_static(p, &space)?
                } else {
                    h_eff_2(p, &space)?
                };
                let mut d = vec![
                    DissipatorSpec::standard(o.c.clone(), p.kappa2)?,
                    DissipatorSpec::standard(o.sm.clone(), p.gamma)?,
                ];
                d.retain(|s| s.coefficient.re > 0.0);
                (Hamiltonian::constant(h), d)
            }
        };
        let mut observables = Vec::new();
        for &k in &preset.observables {
            let op = match k {
                ObservableKind::Pe => o.pe.clone(),
                ObservableKind::Pg => o.pg.clone(),
                ObservableKind::NC => o.n_c(),
                ObservableKind::NAs | ObservableKind::NALab => {
                    return Err(ExperimentError::UnsupportedObservable {
                        observable: k.name(),
                        model: preset.model,
                    })
                }
            };
            observables.push((k.name().to_string(), op));
        }
        let psi = basis_product_state(&space, &[init.atom_label(), init.n_c])?;
        return Ok(BuiltRun {
            hamiltonian,
            dissipators,
            rho0: DensityMatrix::from_pure(&psi),
            observables,
        });
    }

    let o = ModelOperators::new(&space)?;
    let (hamiltonian, dissipators) = match preset.model {
        ModelKind::LabFull => lab_master_equation(p, &space)?,
        ModelKind::SqueezedFull => squeezed_master_equation(p, &space, Rwa::Full)?,
        _ => squeezed_master_equation(p, &space, Rwa::RotatingOnly)?,
    };
    let dissipators: Vec<DissipatorSpec> = dissipators
        .into_iter()
        .filter(|s| s.coefficient.norm() > 0.0)
        .collect();
    let mut observables = Vec::new();
    for &k in &preset.observables {
        let op = match (k, preset.model) {
            (ObservableKind::Pe, _) => o.pe.clone(),
            (ObservableKind::Pg, _) => o.pg.clone(),
            (ObservableKind::NC, _) => o.n_c(),
            (ObservableKind::NAs, ModelKind::LabFull) => {
                return Err(ExperimentError::UnsupportedObservable {
                    observable: k.name(),
                    model: preset.model,
                })
            }
            (ObservableKind::NAs, _) => o.n_a(),
            (ObservableKind::NALab, ModelKind::LabFull) => o.n_a(),
            (ObservableKind::NALab, _) => lab_photon_observable(p.r_p, p.theta_p, &space)?,
        };
        observables.push((k.name().to_string(), op));
    }
    let psi = basis_product_state(&space, &[init.atom_label(), init.n_a, init.n_c])?;
    Ok(BuiltRun {
        hamiltonian,
        dissipators,
        rho0: DensityMatrix::from_pure(&psi),
        observables,
    })
}

/// Result of executing a preset.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub evolution: Evolution,
    pub wall_time_s: f64,
}

/// Build and integrate a preset.
pub fn execute(preset: &ExperimentPreset) -> Result<RunResult, ExperimentError> {
    let built = build_run(preset)?;
    let start = Instant::now();
    let evolution = evolve(
        &built.rho0,
        &built.hamiltonian,
        &built.dissipators,
        &preset.integrator,
        &built.observables,
    )?;
    Ok(RunResult {
        evolution,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
