//! Adiabatic elimination of the lossy squeezed mode `a_s`.
//!
//! The interaction splits into a rotating channel (`a_sσ₊`, `a_sc†`) and a
//! counter-rotating channel (`a_s†σ₊`, `a_s†c†`). Each channel, once `a_s`
//! is slaved to the atom and mode `c`, contributes a collapse operator on the
//! reduced space `[2, n_c]`.

use std::sync::Once;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::density::DensityMatrix;
use crate::lindblad::{
    evolve, DissipatorSpec, Hamiltonian, IntegratorConfig, LindbladError, TimeSeries,
};
use crate::master::{squeezed_master_equation, MasterError};
use crate::model::{
    effective_detunings_and_coupling_1, h_eff_1_static, ModelError, ModelOperators,
    ReducedOperators, Rwa, SystemParams,
};
use crate::operator::{basis_product_state, HilbertSpace, Operator};

#[derive(Debug, Error)]
pub enum EffectiveError {
    #[error("degenerate elimination: {0}")]
    Degenerate(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Operator(#[from] crate::operator::OperatorError),
}

static DETUNING_WARNING: Once = Once::new();

/// Channel detunings and the effective decay rates they produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EliminationParams {
    /// `Δ_q(Δ_c) − Δ_s`.
    pub delta_r: f64,
    /// `Δ_q(Δ_c) + Δ_s`.
    pub delta_cr: f64,
    pub kappa1: f64,
    /// `κ₁/(Δ_r² + (κ₁/2)²)`.
    pub rate_r: f64,
    /// `κ₁/(Δ_cr² + (κ₁/2)²)`.
    pub rate_cr: f64,
}

/// `κ/(Δ² + (κ/2)²)`.
pub fn effective_rate(kappa1: f64, delta: f64) -> f64 {
    let den = delta * delta + 0.25 * kappa1 * kappa1;
    if den == 0.0 {
        0.0
    } else {
        kappa1 / den
    }
}

impl EliminationParams {
    /// The atom and hopping channels see `Δ_q` and `Δ_c` respectively. When
    /// they differ by more than `1e−6·|Δ_r|` the two are averaged.
    pub fn new(p: &SystemParams) -> Self {
        let ds = p.delta_s();
        let (dr_atom, dr_hop) = (p.delta_q - ds, p.delta_c - ds);
        let delta_r = if (dr_atom - dr_hop).abs() > 1e-6 * dr_atom.abs() {
            DETUNING_WARNING.call_once(|| {
                log::warn!(
                    "delta_q = {} and delta_c = {} differ; averaging them in the channel detunings",
                    p.delta_q,
                    p.delta_c
                )
            });
            0.5 * (dr_atom + dr_hop)
        } else {
            dr_atom
        };
        let delta_cr = delta_r + 2.0 * ds;
        Self::from_detunings(delta_r, delta_cr, p.kappa1)
    }

    pub fn from_detunings(delta_r: f64, delta_cr: f64, kappa1: f64) -> Self {
        Self {
            delta_r,
            delta_cr,
            kappa1,
            rate_r: effective_rate(kappa1, delta_r),
            rate_cr: effective_rate(kappa1, delta_cr),
        }
    }
}

/// Collapse operators left behind by the eliminated mode.
#[derive(Debug, Clone)]
pub struct CollapseOperatorPair {
    /// `g cosh(r_p) σ₋ + J cosh(r_p) c`.
    pub op_r: Operator,
    /// `g sinh(r_p) σ₊ + J sinh(r_p) c†`.
    pub op_cr: Operator,
}

impl CollapseOperatorPair {
    pub fn new(p: &SystemParams, reduced: &HilbertSpace) -> Result<Self, EffectiveError> {
        let o = ReducedOperators::new(reduced)?;
        let (ch, sh) = (p.r_p.cosh(), p.r_p.sinh());
        Ok(Self {
            op_r: &((p.g * ch) * &o.sm) + &((p.j * ch) * &o.c),
            op_cr: &((p.g * sh) * &o.sp) + &((p.j * sh) * &o.c.dagger()),
        })
    }
}

/// Interaction-picture rotating and counter-rotating parts `(H_r(t), H_cr(t))`.
///
/// `H_r = g cosh(r_p) a_sσ₊ e^{i(Δ_q−Δ_s)t} + J cosh(r_p) a_s c† e^{i(Δ_c−Δ_s)t} + h.c.`,
/// `H_cr = g sinh(r_p) a_s†σ₊ e^{i(Δ_q+Δ_s)t} + J sinh(r_p) a_s†c† e^{i(Δ_c+Δ_s)t} + h.c.`
pub fn split_hamiltonian(
    p: &SystemParams,
    space: &HilbertSpace,
) -> Result<(Hamiltonian, Hamiltonian), EffectiveError> {
    if p.theta_p != 0.0 {
        return Err(ModelError::UnsupportedPhase { theta_p: p.theta_p }.into());
    }
    let o = ModelOperators::new(space)?;
    let ds = p.delta_s();
    let (ch, sh) = (p.r_p.cosh(), p.r_p.sinh());
    let ad = o.a.dagger();
    let cd = o.c.dagger();
    let zero = Operator::zeros(space);
    let h_r = Hamiltonian::constant(zero.clone())
        .with_term((p.g * ch) * &(&o.a * &o.sp), p.delta_q - ds)?
        .with_term((p.j * ch) * &(&o.a * &cd), p.delta_c - ds)?;
    let h_cr = Hamiltonian::constant(zero)
        .with_term((p.g * sh) * &(&ad * &o.sp), p.delta_q + ds)?
        .with_term((p.j * sh) * &(&ad * &cd), p.delta_c + ds)?;
    Ok((h_r, h_cr))
}

/// Rotating channel in its co-moving frame:
/// `g cosh(r_p)(a_sσ₊ + σ₋a_s†) + J cosh(r_p)(a_sc† + ca_s†) − Δ_r a_s†a_s`.
pub fn rotated_h_r(p: &SystemParams, space: &HilbertSpace) -> Result<Operator, EffectiveError> {
    let o = ModelOperators::new(space)?;
    let elim = EliminationParams::new(p);
    let ch = p.r_p.cosh();
    let x = &((p.g * ch) * &(&o.a * &o.sp)) + &((p.j * ch) * &(&o.a * &o.c.dagger()));
    Ok(&(&x + &x.dagger()) - &(elim.delta_r * &o.n_a()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Rotating,
    Counter,
}

/// Slaved mode `a_s ≈ (c_σ σ + c_c c)/denominator`, with `σ = σ₋, c` for the
/// rotating channel and `σ = σ₊, c†` for the counter channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LangevinOperator {
    pub channel: Channel,
    pub c_sigma: f64,
    pub c_c: f64,
    pub denominator: Complex64,
}

impl LangevinOperator {
    /// Largest coefficient of the Heisenberg–Langevin right-hand side for
    /// `a_s` once the slaved value is substituted. Zero at stationarity.
    ///
    /// Rotating: `ȧ_s = −i(g cosh σ₋ + J cosh c − Δ_r a_s) − (κ₁/2)a_s`.
    /// Counter: `ȧ_s = −i(g sinh σ₊ + J sinh c† + Δ_cr a_s) − (κ₁/2)a_s`.
    pub fn stationarity_residual(&self, p: &SystemParams) -> f64 {
        let elim = EliminationParams::new(p);
        let i = Complex64::new(0.0, 1.0);
        let self_term = match self.channel {
            Channel::Rotating => i * elim.delta_r - 0.5 * p.kappa1,
            Channel::Counter => -i * elim.delta_cr - 0.5 * p.kappa1,
        };
        let (gs, js) = match self.channel {
            Channel::Rotating => (p.g * p.r_p.cosh(), p.j * p.r_p.cosh()),
            Channel::Counter => (p.g * p.r_p.sinh(), p.j * p.r_p.sinh()),
        };
        let res_sigma = -i * gs + self_term * (self.c_sigma / self.denominator);
        let res_c = -i * js + self_term * (self.c_c / self.denominator);
        res_sigma.norm().max(res_c.norm())
    }
}

/// Slaved operator for one channel: rotating
/// `[g cosh σ₋ + J cosh c]/(Δ_r + iκ₁/2)`, counter
/// `[g sinh σ₊ + J sinh c†]/(−Δ_cr + iκ₁/2)`.
pub fn langevin_effective_operator(
    channel: Channel,
    p: &SystemParams,
) -> Result<LangevinOperator, EffectiveError> {
    let elim = EliminationParams::new(p);
    let half = 0.5 * p.kappa1;
    let (c_sigma, c_c, denominator) = match channel {
        Channel::Rotating => (
            p.g * p.r_p.cosh(),
            p.j * p.r_p.cosh(),
            Complex64::new(elim.delta_r, half),
        ),
        Channel::Counter => (
            p.g * p.r_p.sinh(),
            p.j * p.r_p.sinh(),
            Complex64::new(-elim.delta_cr, half),
        ),
    };
    if denominator.norm() == 0.0 {
        return Err(EffectiveError::Degenerate("zero Langevin denominator"));
    }
    Ok(LangevinOperator {
        channel,
        c_sigma,
        c_c,
        denominator,
    })
}

/// Effective master equation on `[2, n_c]`:
/// static `H_eff¹`, `κ₂L[c] + γL[σ₋] + rate_r L[a′_r] + rate_cr L[a′_cr]`.
pub fn effective_master_equation(
    p: &SystemParams,
    reduced: &HilbertSpace,
) -> Result<(Hamiltonian, Vec<DissipatorSpec>), EffectiveError> {
    effective_master_equation_with(p, reduced, &EliminationParams::new(p))
}

/// [`effective_master_equation`] with explicitly supplied channel rates.
pub fn effective_master_equation_with(
    p: &SystemParams,
    reduced: &HilbertSpace,
    elim: &EliminationParams,
) -> Result<(Hamiltonian, Vec<DissipatorSpec>), EffectiveError> {
    let o = ReducedOperators::new(reduced)?;
    let h = if p.g == 0.0 || p.j == 0.0 {
        // no mediated coupling; keep only the Stark shifts that survive
        let eff = effective_detunings_and_coupling_1(p).ok();
        let de = eff.map(|e| e.delta_e).unwrap_or(0.0);
        let dcp = eff.map(|e| e.delta_c_prime).unwrap_or(0.0);
        &(de * &o.pe) + &((p.delta_c + dcp - p.delta_q) * &o.n_c())
    } else {
        h_eff_1_static(p, reduced)?
    };
    let ops = CollapseOperatorPair::new(p, reduced)?;
    let mut d = vec![
        DissipatorSpec::standard(o.c.clone(), p.kappa2)?,
        DissipatorSpec::standard(o.sm.clone(), p.gamma)?,
        DissipatorSpec::standard(ops.op_r, elim.rate_r)?,
        DissipatorSpec::standard(ops.op_cr, elim.rate_cr)?,
    ];
    d.retain(|s| s.coefficient.re > 0.0 && s.operator.max_abs() > 0.0);
    Ok((Hamiltonian::constant(h), d))
}

/// `dρ/dt` of the effective master equation.
pub fn effective_master_rhs(
    p: &SystemParams,
    rho: &DensityMatrix,
) -> Result<crate::operator::CMatrix, EffectiveError> {
    let (h, d) = effective_master_equation(p, rho.space())?;
    Ok(crate::lindblad::master_rhs(&h, &d, rho, 0.0)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub max_dev_pe: f64,
    pub max_dev_nc: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip)]
    pub full: TimeSeries,
    #[serde(skip)]
    pub effective: TimeSeries,
}

/// Truncations used when comparing the full and reduced models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonSetup {
    pub n_a: usize,
    pub n_c: usize,
    pub rwa: Rwa,
}

/// Run the squeezed-frame master equation and the effective one from
/// `|e, 0, 0⟩` / `|e, 0⟩` on the same grid and report the largest deviations
/// in `P_e` and `⟨c†c⟩`.
pub fn compare_full_vs_effective(
    p: &SystemParams,
    setup: &ComparisonSetup,
    config: &IntegratorConfig,
    tol: f64,
) -> Result<ComparisonReport, EffectiveError> {
    compare_with_rates(p, setup, config, tol, &EliminationParams::new(p))
}

/// [`compare_full_vs_effective`] with explicitly supplied channel rates.
pub fn compare_with_rates(
    p: &SystemParams,
    setup: &ComparisonSetup,
    config: &IntegratorConfig,
    tol: f64,
    elim: &EliminationParams,
) -> Result<ComparisonReport, EffectiveError> {
    let full_space = HilbertSpace::atom_two_modes(setup.n_a, setup.n_c)?;
    let red_space = HilbertSpace::atom_mode(setup.n_c)?;

    let full = run_pair(p, setup, &full_space, config)?;
    let (h, d) = effective_master_equation_with(p, &red_space, elim)?;
    let ro = ReducedOperators::new(&red_space)?;
    let rho0 = DensityMatrix::from_pure(&basis_product_state(&red_space, &[1, 0])?);
    let eff = evolve(
        &rho0,
        &h,
        &d,
        config,
        &[("P_e".into(), ro.pe.clone()), ("n_c".into(), ro.n_c())],
    )?
    .series;

    let dev = |name: &str| -> Result<f64, LindbladError> {
        let a = full.trace(name)?;
        let b = eff.trace(name)?;
        Ok(a.iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
    };
    let max_dev_pe = dev("P_e")?;
    let max_dev_nc = dev("n_c")?;
    Ok(ComparisonReport {
        max_dev_pe,
        max_dev_nc,
        tolerance: tol,
        passed: max_dev_pe < tol && max_dev_nc < tol,
        full,
        effective: eff,
    })
}

fn run_pair(
    p: &SystemParams,
    setup: &ComparisonSetup,
    space: &HilbertSpace,
    config: &IntegratorConfig,
) -> Result<TimeSeries, EffectiveError> {
    let (h, d) = squeezed_master_equation(p, space, setup.rwa)?;
    let o = ModelOperators::new(space)?;
    let rho0 = DensityMatrix::from_pure(&basis_product_state(space, &[1, 0, 0])?);
    Ok(evolve(
        &rho0,
        &h,
        &d,
        config,
        &[("P_e".into(), o.pe.clone()), ("n_c".into(), o.n_c())],
    )?
    .series)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub kappa1: f64,
    pub max_nc: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Interpolated `κ₁` where the first-period maximum of `⟨c†c⟩` drops below the threshold.
    pub crossing: Option<f64>,
    pub threshold: f64,
    pub t_final: f64,
}

/// Options for [`kappa1_breakdown_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOptions {
    pub n_c: usize,
    pub threshold: f64,
    /// Extra points inserted inside the bracketing interval.
    pub refine_points: usize,
    /// Recorded samples per run.
    pub samples: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_c: 4,
            threshold: 0.5,
            refine_points: 8,
            samples: 400,
        }
    }
}

/// Maximum `⟨c†c⟩` over one analytic period `π/|g_eff|` of the effective model.
pub fn first_period_max_nc(
    p: &SystemParams,
    opts: &SweepOptions,
) -> Result<(f64, f64), EffectiveError> {
    let eff = effective_detunings_and_coupling_1(p)?;
    let t_final = std::f64::consts::PI / eff.g_eff.abs();
    let space = HilbertSpace::atom_mode(opts.n_c)?;
    let (h, d) = effective_master_equation(p, &space)?;
    let ro = ReducedOperators::new(&space)?;
    let rho0 = DensityMatrix::from_pure(&basis_product_state(&space, &[1, 0])?);
    let mut cfg = IntegratorConfig::adaptive(t_final / opts.samples as f64, t_final, 1);
    cfg.check_positivity = false;
    let ev = evolve(&rho0, &h, &d, &cfg, &[("n_c".into(), ro.n_c())])?;
    Ok((ev.series.max_of("n_c")?, t_final))
}

fn sweep_points(
    p: &SystemParams,
    values: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<(SweepPoint, f64)>, EffectiveError> {
    let run = |&k: &f64| -> Result<(SweepPoint, f64), EffectiveError> {
        let (m, t) = first_period_max_nc(&p.with_kappa1(k), opts)?;
        Ok((
            SweepPoint {
                kappa1: k,
                max_nc: m,
            },
            t,
        ))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        values.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        values.iter().map(run).collect()
    }
}

/// Linear interpolation of the first downward crossing of `threshold`.
pub fn interpolate_crossing(points: &[SweepPoint], threshold: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.max_nc >= threshold && b.max_nc < threshold {
            let f = (a.max_nc - threshold) / (a.max_nc - b.max_nc);
            Some(a.kappa1 + f * (b.kappa1 - a.kappa1))
        } else {
            None
        }
    })
}

/// First-period maximum of `⟨c†c⟩` versus `κ₁` under the effective master equation.
///
/// After the requested grid is evaluated, the bracket around the first
/// crossing is refined with `refine_points` evenly spaced extra values.
pub fn kappa1_breakdown_sweep(
    p: &SystemParams,
    kappa1_values: &[f64],
    opts: &SweepOptions,
) -> Result<SweepReport, EffectiveError> {
    let mut values = kappa1_values.to_vec();
    values.sort_by(|a, b| a.total_cmp(b));
    values.dedup();
    let mut results = sweep_points(p, &values, opts)?;
    let t_final = results.first().map(|r| r.1).unwrap_or(0.0);
    let mut points: Vec<SweepPoint> = results.drain(..).map(|r| r.0).collect();
    if opts.refine_points > 0 {
        let bracket = points
            .windows(2)
            .find(|w| w[0].max_nc >= opts.threshold && w[1].max_nc < opts.threshold);
        if let Some(w) = bracket {
            let (lo, hi) = (w[0].kappa1, w[1].kappa1);
            let extra: Vec<f64> = (1..=opts.refine_points)
                .map(|k| lo + (hi - lo) * k as f64 / (opts.refine_points + 1) as f64)
                .collect();
            points.extend(sweep_points(p, &extra, opts)?.into_iter().map(|r| r.0));
            points.sort_by(|a, b| a.kappa1.total_cmp(&b.kappa1));
        }
    }
    let crossing = interpolate_crossing(&points, opts.threshold);
    Ok(SweepReport {
        points,
        crossing,
        threshold: opts.threshold,
        t_final,
    })
}
