//! Browser bindings for three views of the simulator: the analytic
//! enhancement curve, effective-model dynamics and the reservoir occupation
//! map.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;

use cqed_squeeze::effective::effective_master_equation;
use cqed_squeeze::experiment::{
    rotating_family_params, Dissipation, Reservoir, ScanFamily, SCAN_DISSIPATION,
};
use cqed_squeeze::lindblad::{evolve, IntegratorConfig};
use cqed_squeeze::model::{effective_detunings_and_coupling_1, reservoir_stats};
use cqed_squeeze::{
    atom_op, basis_product_state, embed, fock_destroy, AtomOp, DensityMatrix, HilbertSpace,
};

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `|g(r_p)| / |g(baseline)|` at `points` evenly spaced `r_p` in `[0, rp_max]`.
///
/// `family` is `"fig2d"` (rotating channel, baseline 0) or `"fig3c"`
/// (counter-rotating channel, baseline 1). Points where the coupling is
/// undefined come back as NaN.
#[wasm_bindgen]
pub fn enhancement_curve(family: &str, rp_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let family: ScanFamily = family.parse().map_err(js)?;
    if !(rp_max > 0.0) || points < 2 {
        return Err(JsError::new("need rp_max > 0 and at least two points"));
    }
    let base = family.analytic_coupling(family.baseline_rp()).map_err(js)?;
    Ok((0..points)
        .map(|i| {
            let r = rp_max * i as f64 / (points - 1) as f64;
            family.analytic_coupling(r).map_or(f64::NAN, |g| g / base)
        })
        .collect())
}

/// Effective atom + auxiliary-cavity dynamics from `|e, 0⟩` under matched
/// squeezing.
///
/// Returns rows `[t, P_e, ⟨c†c⟩]` flattened, `samples + 1` rows over
/// `periods` analytic periods.
#[wasm_bindgen]
pub fn effective_dynamics(
    r_p: f64,
    kappa1: f64,
    periods: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    if samples == 0 || !(periods > 0.0) {
        return Err(JsError::new("need positive periods and samples"));
    }
    let diss = Dissipation {
        kappa1,
        ..SCAN_DISSIPATION
    };
    let p = rotating_family_params(r_p, diss, Reservoir::Matched).map_err(js)?;
    let g_eff = effective_detunings_and_coupling_1(&p).map_err(js)?.g_eff;
    let t_final = periods * PI / g_eff.abs();

    let space = HilbertSpace::atom_mode(3).map_err(js)?;
    let (h, d) = effective_master_equation(&p, &space).map_err(js)?;
    let pe = embed(&atom_op(AtomOp::ProjectorE), 0, &space).map_err(js)?;
    let c = embed(&fock_destroy(3).map_err(js)?, 1, &space).map_err(js)?;
    let n_c = &c.dagger() * &c;
    let rho0 = DensityMatrix::from_pure(&basis_product_state(&space, &[1, 0]).map_err(js)?);
    let mut cfg = IntegratorConfig::adaptive(t_final / samples as f64, t_final, 1);
    cfg.check_positivity = false;
    let ev = evolve(
        &rho0,
        &h,
        &d,
        &cfg,
        &[("P_e".into(), pe), ("n_c".into(), n_c)],
    )
    .map_err(js)?;

    let s = &ev.series;
    let pe = s.trace("P_e").map_err(js)?;
    let nc = s.trace("n_c").map_err(js)?;
    let mut out = Vec::with_capacity(3 * s.len());
    for (i, &t) in s.times().iter().enumerate() {
        out.extend([t, pe[i], nc[i]]);
    }
    Ok(out)
}

/// Reservoir occupation `N_s` seen by the squeezed mode on an `n × n` grid of
/// `r_e ∈ [0, re_max]` (rows) and `θ_e ∈ [0, 2π]` (columns), row-major.
#[wasm_bindgen]
pub fn occupation_map(r_p: f64, theta_p: f64, re_max: f64, n: usize) -> Vec<f64> {
    let step = |k: usize, hi: f64| hi * k as f64 / (n.max(2) - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let r_e = step(i, re_max);
        for j in 0..n {
            out.push(reservoir_stats(r_p, theta_p, r_e, step(j, 2.0 * PI)).0);
        }
    }
    out
}
