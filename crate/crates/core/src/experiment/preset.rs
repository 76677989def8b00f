//! Named parameter sets for the figure panels.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::lindblad::{IntegratorConfig, Method};
use crate::model::{
    effective_detunings_and_coupling_1, g_eff_prime, lab_detuning, solve_resonance, SystemParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    Fig2a,
    Fig2bScaled,
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4a,
    Fig4b,
}

impl PresetName {
    pub const ALL: [PresetName; 9] = [
        PresetName::Fig2a,
        PresetName::Fig2bScaled,
        PresetName::Fig2c,
        PresetName::Fig2d,
        PresetName::Fig3a,
        PresetName::Fig3b,
        PresetName::Fig3c,
        PresetName::Fig4a,
        PresetName::Fig4b,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Fig2a => "fig2a",
            PresetName::Fig2bScaled => "fig2b_scaled",
            PresetName::Fig2c => "fig2c",
            PresetName::Fig2d => "fig2d",
            PresetName::Fig3a => "fig3a",
            PresetName::Fig3b => "fig3b",
            PresetName::Fig3c => "fig3c",
            PresetName::Fig4a => "fig4a",
            PresetName::Fig4b => "fig4b",
        }
    }

    pub fn family(self) -> Family {
        match self {
            PresetName::Fig3a | PresetName::Fig3b | PresetName::Fig3c => Family::Counter,
            _ => Family::Rotating,
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ExperimentError::UnknownPreset(s.to_string()))
    }
}

/// Detuning pattern shared by a group of panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `J = 2g`, `Δ_s − Δ_q = 50g e^{r_p}`, `Δ_s + Δ_q = 20(Δ_s − Δ_q)`, resonance imposed.
    Rotating,
    /// `g = J`, `Δ_c = −Δ_q`, `Δ_s + Δ_q = 25g e^{r_p}`, `Δ_s − Δ_q = 20(Δ_s + Δ_q)`.
    Counter,
}

impl Family {
    /// Channel whose resonance the detunings are closer to: `Δ_q ≈ Δ_c` or `Δ_q ≈ −Δ_c`.
    pub fn of(p: &SystemParams) -> Self {
        if (p.delta_q + p.delta_c).abs() < (p.delta_q - p.delta_c).abs() {
            Family::Counter
        } else {
            Family::Rotating
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Lab-frame Hamiltonian with the lab-frame squeezed reservoir on `[2, n_a, n_c]`.
    LabFull,
    /// Squeezed-frame Hamiltonian with all coupling terms.
    SqueezedFull,
    /// Squeezed-frame Hamiltonian without the counter-rotating terms.
    SqueezedRotating,
    /// `H_eff¹` on `[2, n_c]` with `κ₂` and `γ` only.
    Heff1,
    /// `H_eff²` on `[2, n_c]` with `κ₂` and `γ` only.
    Heff2,
    /// Effective master equation with the eliminated-mode collapse operators on `[2, n_c]`.
    EffectiveAppendix,
}

impl ModelKind {
    /// Whether the model acts on the reduced atom–`c` space.
    pub fn is_reduced(self) -> bool {
        matches!(
            self,
            ModelKind::Heff1 | ModelKind::Heff2 | ModelKind::EffectiveAppendix
        )
    }
}

/// Recorded observable columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservableKind {
    #[serde(rename = "P_e")]
    Pe,
    #[serde(rename = "P_g")]
    Pg,
    /// `⟨a_s†a_s⟩` in the squeezed frame.
    #[serde(rename = "n_as")]
    NAs,
    #[serde(rename = "n_c")]
    NC,
    /// `⟨a†a⟩` of the lab-frame mode.
    #[serde(rename = "n_a_lab")]
    NALab,
}

impl ObservableKind {
    /// Column order of the series table.
    pub const COLUMNS: [ObservableKind; 5] = [
        ObservableKind::Pe,
        ObservableKind::Pg,
        ObservableKind::NAs,
        ObservableKind::NC,
        ObservableKind::NALab,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObservableKind::Pe => "P_e",
            ObservableKind::Pg => "P_g",
            ObservableKind::NAs => "n_as",
            ObservableKind::NC => "n_c",
            ObservableKind::NALab => "n_a_lab",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomLevel {
    G,
    E,
}

/// Product-state labels `|atom, n_a, n_c⟩`. `n_a` must be 0 for reduced models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub atom: AtomLevel,
    #[serde(default)]
    pub n_a: usize,
    #[serde(default)]
    pub n_c: usize,
}

impl InitialState {
    pub fn excited_vacuum() -> Self {
        Self {
            atom: AtomLevel::E,
            n_a: 0,
            n_c: 0,
        }
    }

    pub fn ground_vacuum() -> Self {
        Self {
            atom: AtomLevel::G,
            n_a: 0,
            n_c: 0,
        }
    }

    pub fn atom_label(&self) -> usize {
        match self.atom {
            AtomLevel::G => 0,
            AtomLevel::E => 1,
        }
    }
}

/// Fock truncations of `a_s` (or `a`) and `c`. `n_a` is unused by reduced models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub n_a: usize,
    pub n_c: usize,
}

impl FromStr for Truncation {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad =
            || ExperimentError::InvalidArgument(format!("truncation {s:?}, expected n_a,n_c"));
        let (a, c) = s.split_once(',').ok_or_else(bad)?;
        Ok(Self {
            n_a: a.trim().parse().map_err(|_| bad())?,
            n_c: c.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// A fully specified run: parameters, model, initial state, observables and integrator.
///
/// This is also the schema of `--config` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPreset {
    /// Preset the run was resolved from, or a free-form label for custom configs.
    pub name: String,
    pub model: ModelKind,
    pub params: SystemParams,
    pub truncation: Truncation,
    pub initial: InitialState,
    pub observables: Vec<ObservableKind>,
    /// Trace used for period extraction.
    pub period_trace: ObservableKind,
    pub integrator: IntegratorConfig,
}

/// Dissipation triple `(κ₁, κ₂, γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipation {
    pub kappa1: f64,
    pub kappa2: f64,
    pub gamma: f64,
}

/// Reservoir squeezing: matched (`r_e = r_p`, `θ_e = π`) or an explicit pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reservoir {
    Matched,
    Explicit { r_e: f64, theta_e: f64 },
}

/// Parameters of the rotating-channel panels at squeezing `r_p`.
pub fn rotating_family_params(
    r_p: f64,
    diss: Dissipation,
    reservoir: Reservoir,
) -> Result<SystemParams, ExperimentError> {
    let s = 50.0 * r_p.exp();
    let delta_s = 10.5 * s;
    let mut p = SystemParams {
        g: 1.0,
        j: 2.0,
        kappa1: diss.kappa1,
        kappa2: diss.kappa2,
        gamma: diss.gamma,
        r_p,
        theta_p: 0.0,
        r_e: 0.0,
        theta_e: 0.0,
        delta_a: lab_detuning(delta_s, r_p),
        delta_c: 0.0,
        delta_q: 9.5 * s,
    };
    set_reservoir(&mut p, reservoir);
    let roots = solve_resonance(p.g, p.j, r_p, p.delta_s(), p.delta_q)?;
    p.delta_c = roots.delta_c;
    Ok(p)
}

/// Parameters of the counter-rotating-channel panels at squeezing `r_p`.
pub fn counter_family_params(r_p: f64, diss: Dissipation, reservoir: Reservoir) -> SystemParams {
    let s = 25.0 * r_p.exp();
    let mut p = SystemParams {
        g: 1.0,
        j: 1.0,
        kappa1: diss.kappa1,
        kappa2: diss.kappa2,
        gamma: diss.gamma,
        r_p,
        theta_p: 0.0,
        r_e: 0.0,
        theta_e: 0.0,
        delta_a: lab_detuning(10.5 * s, r_p),
        delta_c: 9.5 * s,
        delta_q: -9.5 * s,
    };
    set_reservoir(&mut p, reservoir);
    p
}

fn set_reservoir(p: &mut SystemParams, reservoir: Reservoir) {
    match reservoir {
        Reservoir::Matched => {
            p.r_e = p.r_p;
            p.theta_e = PI;
        }
        Reservoir::Explicit { r_e, theta_e } => {
            p.r_e = r_e;
            p.theta_e = theta_e;
        }
    }
}

/// Relative residuals of the caption constraints for a family.
pub fn caption_residuals(p: &SystemParams, family: Family) -> Vec<(&'static str, f64)> {
    let ds = p.delta_s();
    let e = p.g * p.r_p.exp();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    match family {
        Family::Rotating => {
            let eff = effective_detunings_and_coupling_1(p);
            let resonance = match eff {
                Ok(eff) => {
                    let lhs = eff.delta_e - eff.delta_c_prime + p.delta_q - p.delta_c;
                    lhs.abs() / p.frequency_scale()
                }
                Err(_) => f64::INFINITY,
            };
            vec![
                ("J = 2g", rel(p.j, 2.0 * p.g)),
                (
                    "delta_s - delta_q = 50 g e^r_p",
                    rel(ds - p.delta_q, 50.0 * e),
                ),
                (
                    "delta_s + delta_q = 20 (delta_s - delta_q)",
                    rel(ds + p.delta_q, 20.0 * (ds - p.delta_q)),
                ),
                ("resonance", resonance),
            ]
        }
        Family::Counter => vec![
            ("g = J", rel(p.g, p.j)),
            ("delta_c = -delta_q", rel(p.delta_c, -p.delta_q)),
            (
                "delta_s + delta_q = 25 g e^r_p",
                rel(ds + p.delta_q, 25.0 * e),
            ),
            (
                "delta_s - delta_q = 20 (delta_s + delta_q)",
                rel(ds - p.delta_q, 20.0 * (ds + p.delta_q)),
            ),
        ],
    }
}

/// Fail unless every caption constraint holds to `1e−10` relative.
pub fn check_caption_constraints(p: &SystemParams, family: Family) -> Result<(), ExperimentError> {
    for (name, r) in caption_residuals(p, family) {
        if !(r < 1e-10) {
            return Err(ExperimentError::Constraint {
                constraint: name,
                residual: r,
            });
        }
    }
    Ok(())
}

/// `π/|g_eff|`, the analytic vacuum-Rabi period of the rotating channel.
pub fn analytic_period_rotating(p: &SystemParams) -> Result<f64, ExperimentError> {
    Ok(PI / effective_detunings_and_coupling_1(p)?.g_eff.abs())
}

/// `π/|g_eff′|`, the analytic period of the counter-rotating channel.
pub fn analytic_period_counter(p: &SystemParams) -> Result<f64, ExperimentError> {
    Ok(PI / g_eff_prime(p)?.abs())
}

/// Analytic period for the family's effective coupling.
pub fn analytic_period(p: &SystemParams, family: Family) -> Result<f64, ExperimentError> {
    match family {
        Family::Rotating => analytic_period_rotating(p),
        Family::Counter => analytic_period_counter(p),
    }
}

/// Fixed-step exponential integrator recording about `rows` samples.
pub fn etd_config(dt: f64, t_final: f64, rows: usize) -> IntegratorConfig {
    let steps = (t_final / dt).ceil() as usize;
    let stride = (steps / rows.max(1)).max(1);
    IntegratorConfig {
        method: Method::EtdRk4,
        dt,
        t_final,
        record_stride: stride,
        hermitize_every: 100,
        check_positivity: true,
    }
}

/// Exact propagation between `rows` evenly spaced records.
pub fn propagator_config(t_final: f64, rows: usize) -> IntegratorConfig {
    IntegratorConfig {
        method: Method::Propagator,
        dt: t_final / rows.max(1) as f64,
        t_final,
        record_stride: 1,
        hermitize_every: 100,
        check_positivity: true,
    }
}

/// Squeezing used when `run` is given a scan family name.
pub const FIG2D_RUN_RP: f64 = 2.0;
pub const FIG3C_RUN_RP: f64 = 2.0;

/// Dissipation of the enhancement scans.
pub const SCAN_DISSIPATION: Dissipation = Dissipation {
    kappa1: 10.0,
    kappa2: 1e-3,
    gamma: 1e-3,
};

/// Long-run duration of the steady-state panel.
pub const FIG3B_T_FINAL: f64 = 120.0;

const FIG2A: Dissipation = Dissipation {
    kappa1: 10.0,
    kappa2: 1e-3,
    gamma: 1e-3,
};
const FIG2C: Dissipation = Dissipation {
    kappa1: 100.0,
    kappa2: 0.1,
    gamma: 0.1,
};
const FIG3A: Dissipation = Dissipation {
    kappa1: 100.0,
    kappa2: 0.1,
    gamma: 0.1,
};
const FIG3B: Dissipation = Dissipation {
    kappa1: 100.0,
    kappa2: 0.2,
    gamma: 1e-3,
};
const FIG4B: Dissipation = Dissipation {
    kappa1: 100.0,
    kappa2: 0.0,
    gamma: 0.0,
};

/// Squeezing and reservoir of the scaled mismatch panel.
pub const FIG2B_SCALED_RP: f64 = 1.25;

/// Resolve a preset into a complete run description.
pub fn resolve_preset(name: PresetName) -> Result<ExperimentPreset, ExperimentError> {
    let all_full = vec![
        ObservableKind::Pe,
        ObservableKind::Pg,
        ObservableKind::NAs,
        ObservableKind::NC,
    ];
    let reduced = vec![ObservableKind::Pe, ObservableKind::Pg, ObservableKind::NC];
    let default_trunc = Truncation { n_a: 4, n_c: 5 };
    let preset = match name {
        PresetName::Fig2a => {
            let p = rotating_family_params(
                0.0,
                FIG2A,
                Reservoir::Explicit {
                    r_e: 0.0,
                    theta_e: 0.0,
                },
            )?;
            let t = 3.0 * analytic_period_rotating(&p)?;
            ExperimentPreset {
                name: name.to_string(),
                model: ModelKind::SqueezedFull,
                params: p,
                truncation: default_trunc,
                initial: InitialState::excited_vacuum(),
                observables: all_full,
                period_trace: ObservableKind::Pe,
                integrator: etd_config(5e-3, t, 2000),
            }
        }
        PresetName::Fig2bScaled => {
            let p = rotating_family_params(
                FIG2B_SCALED_RP,
                FIG2A,
                Reservoir::Explicit {
                    r_e: 0.0,
                    theta_e: 0.0,
                },
            )?;
            let t = 3.0 * analytic_period_rotating(&p)?;
            ExperimentPreset {
                name: name.to_string(),
                model: ModelKind::SqueezedRotating,
                params: p,
                truncation: Truncation { n_a: 8, n_c: 4 },
                initial: InitialState::excited_vacuum(),
                observables: all_full,
                period_trace: ObservableKind::Pe,
                integrator: etd_config(2e-3, t, 2000),
            }
        }
        PresetName::Fig2c | PresetName::Fig4a => {
            let p = rotating_family_params(4.0, FIG2C, Reservoir::Matched)?;
            let t = 3.0 * analytic_period_rotating(&p)?;
            let (model, trunc, obs, integrator) = if name == PresetName::Fig2c {
                (
                    ModelKind::SqueezedRotating,
                    default_trunc,
                    all_full,
                    etd_config(2.5e-4, t, 2000),
                )
            } else {
                (
                    ModelKind::EffectiveAppendix,
                    Truncation { n_a: 0, n_c: 5 },
                    reduced,
                    propagator_config(t, 2000),
                )
            };
            ExperimentPreset {
                name: name.to_string(),
                model,
                params: p,
                truncation: trunc,
                initial: InitialState::excited_vacuum(),
                observables: obs,
                period_trace: ObservableKind::Pe,
                integrator,
            }
        }
        PresetName::Fig2d => {
            let p = rotating_family_params(FIG2D_RUN_RP, SCAN_DISSIPATION, Reservoir::Matched)?;
            let t = 3.0 * analytic_period_rotating(&p)?;
            ExperimentPreset {
                name: name.to_string(),
                model: ModelKind::SqueezedRotating,
                params: p,
                truncation: Truncation { n_a: 2, n_c: 2 },
                initial: InitialState::excited_vacuum(),
                observables: all_full,
                period_trace: ObservableKind::Pe,
                integrator: propagator_config(t, 2000),
            }
        }
        PresetName::Fig3a | PresetName::Fig3b | PresetName::Fig3c => {
            let (diss, rp) = match name {
                PresetName::Fig3a => (FIG3A, 4.0),
                PresetName::Fig3b => (FIG3B, 4.0),
                _ => (SCAN_DISSIPATION, FIG3C_RUN_RP),
            };
            let p = counter_family_params(rp, diss, Reservoir::Matched);
            let t = if name == PresetName::Fig3b {
                FIG3B_T_FINAL
            } else {
                5.0 * analytic_period_counter(&p)?
            };
            ExperimentPreset {
                name: name.to_string(),
                model: ModelKind::SqueezedFull,
                params: p,
                truncation: Truncation { n_a: 3, n_c: 3 },
                initial: InitialState::ground_vacuum(),
                observables: all_full,
                period_trace: ObservableKind::NC,
                integrator: propagator_config(t, 2000),
            }
        }
        PresetName::Fig4b => {
            let p = rotating_family_params(4.0, FIG4B, Reservoir::Matched)?;
            let t = analytic_period_rotating(&p)?;
            ExperimentPreset {
                name: name.to_string(),
                model: ModelKind::EffectiveAppendix,
                params: p,
                truncation: Truncation { n_a: 0, n_c: 4 },
                initial: InitialState::excited_vacuum(),
                observables: reduced,
                period_trace: ObservableKind::NC,
                integrator: IntegratorConfig::adaptive(t / 400.0, t, 1),
            }
        }
    };
    check_caption_constraints(&preset.params, name.family())?;
    Ok(preset)
}
