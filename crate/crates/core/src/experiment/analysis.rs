//! Runs that write files: single presets, enhancement scans, the full-versus-effective
//! comparison and the `κ₁` sweep. Also steady-state classification.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::build::execute;
use super::output::{
    code_version, to_toml, write_file, write_series_file, write_table, PeriodSummary, RunManifest,
    RunStats, MANIFEST_FILE, SERIES_FILE,
};
use super::preset::{
    analytic_period, counter_family_params, propagator_config, resolve_preset,
    rotating_family_params, ExperimentPreset, Family, InitialState, ModelKind, ObservableKind,
    PresetName, Reservoir, Truncation, SCAN_DISSIPATION,
};
use super::ExperimentError;
use crate::effective::{
    compare_full_vs_effective, kappa1_breakdown_sweep, ComparisonReport, ComparisonSetup,
    SweepOptions, SweepReport,
};
use crate::lindblad::{extract_period, Method, TimeSeries};
use crate::model::{effective_detunings_and_coupling_1, g_eff_prime, DerivedParams, Rwa};

/// Command-line adjustments applied on top of a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOverrides {
    /// Drop the counter-rotating terms of a full squeezed-frame model.
    pub rwa: bool,
    pub t_final: Option<f64>,
    pub truncation: Option<Truncation>,
}

pub fn apply_overrides(
    mut preset: ExperimentPreset,
    o: &RunOverrides,
) -> Result<ExperimentPreset, ExperimentError> {
    if o.rwa {
        match preset.model {
            ModelKind::SqueezedFull => preset.model = ModelKind::SqueezedRotating,
            ModelKind::SqueezedRotating => {}
            m => {
                return Err(ExperimentError::InvalidArgument(format!(
                    "--rwa applies to squeezed-frame models, not {m:?}"
                )))
            }
        }
    }
    if let Some(t) = o.t_final {
        if !(t > 0.0) {
            return Err(ExperimentError::InvalidArgument(format!(
                "t_final {t} must be positive"
            )));
        }
        // keep roughly the same number of rows
        let cfg = &mut preset.integrator;
        let rows = cfg.record_count().max(2) - 1;
        if cfg.method == Method::Propagator {
            cfg.dt = t / (rows * cfg.record_stride) as f64;
        } else {
            let steps = (t / cfg.dt).ceil() as usize;
            cfg.record_stride = (steps / rows).max(1);
        }
        cfg.t_final = t;
    }
    if let Some(tr) = o.truncation {
        preset.truncation = tr;
    }
    Ok(preset)
}

/// Analytic period of the channel the preset's detunings select.
pub fn preset_analytic_period(preset: &ExperimentPreset) -> Option<f64> {
    let family = match preset.model {
        ModelKind::Heff1 | ModelKind::EffectiveAppendix => Family::Rotating,
        ModelKind::Heff2 => Family::Counter,
        _ => Family::of(&preset.params),
    };
    analytic_period(&preset.params, family).ok()
}

/// Paths and manifest of a finished run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
    pub series: TimeSeries,
}

/// Execute a preset and write `series.csv` and `manifest.toml` into `out`.
pub fn run_to_dir(preset: &ExperimentPreset, out: &Path) -> Result<RunOutput, ExperimentError> {
    let result = execute(preset)?;
    let ev = &result.evolution;
    let series_path = write_series_file(out, SERIES_FILE, &ev.series)?;
    let period = extract_period(&ev.series, preset.period_trace.name())
        .ok()
        .map(|est| {
            PeriodSummary::new(
                preset.period_trace.name(),
                &est,
                preset_analytic_period(preset),
            )
        });
    let manifest = RunManifest {
        code_version: code_version(),
        series_file: SERIES_FILE.to_string(),
        stats: RunStats::new(
            ev.series.len(),
            ev.steps,
            ev.rejected_steps,
            result.wall_time_s,
            &ev.diagnostics,
        ),
        period,
        derived: DerivedParams::from_params(&preset.params).into(),
        experiment: preset.clone(),
    };
    let manifest_path = write_file(out, MANIFEST_FILE, to_toml(&manifest)?.as_bytes())?;
    Ok(RunOutput {
        series_path,
        manifest_path,
        manifest,
        series: result.evolution.series,
    })
}

/// Panel family of an enhancement scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanFamily {
    /// Rotating channel, period of `P_e`, baseline `r_p = 0`.
    Fig2d,
    /// Counter-rotating channel, period of `⟨c†c⟩`, baseline `r_p = 1`.
    Fig3c,
}

impl std::str::FromStr for ScanFamily {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2d" => Ok(ScanFamily::Fig2d),
            "fig3c" => Ok(ScanFamily::Fig3c),
            _ => Err(ExperimentError::InvalidArgument(format!(
                "unknown scan family {s:?} (expected fig2d or fig3c)"
            ))),
        }
    }
}

impl ScanFamily {
    pub fn baseline_rp(self) -> f64 {
        match self {
            ScanFamily::Fig2d => 0.0,
            ScanFamily::Fig3c => 1.0,
        }
    }

    /// `|g_eff(r_p)|` or `|g_eff′(r_p)|`.
    pub fn analytic_coupling(self, r_p: f64) -> Result<f64, ExperimentError> {
        let p = self.params(r_p)?;
        Ok(match self {
            ScanFamily::Fig2d => effective_detunings_and_coupling_1(&p)?.g_eff.abs(),
            ScanFamily::Fig3c => g_eff_prime(&p)?.abs(),
        })
    }

    pub fn params(self, r_p: f64) -> Result<crate::model::SystemParams, ExperimentError> {
        match self {
            ScanFamily::Fig2d => rotating_family_params(r_p, SCAN_DISSIPATION, Reservoir::Matched),
            ScanFamily::Fig3c => Ok(counter_family_params(
                r_p,
                SCAN_DISSIPATION,
                Reservoir::Matched,
            )),
        }
    }

    /// Run description for one scan point, integrated over one analytic period.
    pub fn preset(self, r_p: f64) -> Result<ExperimentPreset, ExperimentError> {
        let p = self.params(r_p)?;
        let (name, model, trunc, initial, trace, family) = match self {
            ScanFamily::Fig2d => (
                PresetName::Fig2d,
                ModelKind::SqueezedRotating,
                Truncation { n_a: 2, n_c: 2 },
                InitialState::excited_vacuum(),
                ObservableKind::Pe,
                Family::Rotating,
            ),
            ScanFamily::Fig3c => (
                PresetName::Fig3c,
                ModelKind::SqueezedFull,
                Truncation { n_a: 3, n_c: 3 },
                InitialState::ground_vacuum(),
                ObservableKind::NC,
                Family::Counter,
            ),
        };
        super::preset::check_caption_constraints(&p, family)?;
        let t = analytic_period(&p, family)?;
        Ok(ExperimentPreset {
            name: format!("{name}@r_p={r_p}"),
            model,
            params: p,
            truncation: trunc,
            initial,
            observables: vec![trace],
            period_trace: trace,
            integrator: propagator_config(t, 2000),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub r_p: f64,
    pub period_numeric: Option<f64>,
    pub ratio_numeric: Option<f64>,
    pub ratio_analytic: f64,
    /// Analytic enhancement below one.
    pub invalid_region: bool,
    /// Why no period was found, when it was not.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub family: ScanFamily,
    pub baseline_rp: f64,
    pub baseline_period: f64,
    pub rows: Vec<ScanRow>,
}

fn scan_period(family: ScanFamily, r_p: f64) -> Result<f64, ExperimentError> {
    let preset = family.preset(r_p)?;
    let ev = execute(&preset)?.evolution;
    Ok(extract_period(&ev.series, preset.period_trace.name())?.period)
}

/// Period ratios `T(baseline)/T(r_p)` against `|g(r_p)/g(baseline)|`.
///
/// Points without a detectable oscillation are flagged, not fatal. The
/// baseline itself must oscillate.
pub fn enhancement_scan(
    family: ScanFamily,
    rp_values: &[f64],
) -> Result<ScanReport, ExperimentError> {
    let base_rp = family.baseline_rp();
    let base_g = family.analytic_coupling(base_rp)?;
    let mut all = vec![base_rp];
    all.extend_from_slice(rp_values);
    let run = |&r: &f64| scan_period(family, r);
    #[cfg(feature = "parallel")]
    let periods: Vec<Result<f64, ExperimentError>> = {
        use rayon::prelude::*;
        all.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let periods: Vec<Result<f64, ExperimentError>> = all.iter().map(run).collect();
    let mut periods = periods.into_iter();
    let baseline_period = periods.next().expect("baseline entry")?;
    let mut rows = Vec::with_capacity(rp_values.len());
    for (&r_p, period) in rp_values.iter().zip(periods) {
        let ratio_analytic = family.analytic_coupling(r_p)? / base_g;
        let (period_numeric, flag) = match period {
            Ok(t) => (Some(t), None),
            Err(e) => (None, Some(e.to_string())),
        };
        rows.push(ScanRow {
            r_p,
            period_numeric,
            ratio_numeric: period_numeric.map(|t| baseline_period / t),
            ratio_analytic,
            invalid_region: ratio_analytic < 1.0,
            flag,
        });
    }
    Ok(ScanReport {
        family,
        baseline_rp: base_rp,
        baseline_period,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
struct ScanManifest<'a> {
    code_version: String,
    table: &'static str,
    family: ScanFamily,
    baseline_rp: f64,
    baseline_period: f64,
    flagged: Vec<(f64, &'a str)>,
}

/// Write `scan.csv` (`r_p, period_numeric, ratio_numeric, ratio_analytic, invalid`) and a manifest.
pub fn write_scan(report: &ScanReport, out: &Path) -> Result<PathBuf, ExperimentError> {
    let mut buf = Vec::new();
    let rows = report.rows.iter().map(|r| {
        vec![
            r.r_p,
            r.period_numeric.unwrap_or(f64::NAN),
            r.ratio_numeric.unwrap_or(f64::NAN),
            r.ratio_analytic,
            if r.invalid_region { 1.0 } else { 0.0 },
        ]
    });
    write_table(
        &mut buf,
        &[
            "r_p",
            "period_numeric",
            "ratio_numeric",
            "ratio_analytic",
            "invalid",
        ],
        rows,
    )
    .map_err(|e| ExperimentError::io(out, e))?;
    let path = write_file(out, "scan.csv", &buf)?;
    let manifest = ScanManifest {
        code_version: code_version(),
        table: "scan.csv",
        family: report.family,
        baseline_rp: report.baseline_rp,
        baseline_period: report.baseline_period,
        flagged: report
            .rows
            .iter()
            .filter_map(|r| r.flag.as_deref().map(|f| (r.r_p, f)))
            .collect(),
    };
    write_file(out, MANIFEST_FILE, to_toml(&manifest)?.as_bytes())?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyStateClass {
    /// `P_e > 0.9` and `⟨c†c⟩ < 0.1`.
    AtomExcitedCavityVacuum,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyStateReport {
    pub p_e_final: f64,
    pub n_c_final: f64,
    /// Largest spread of `P_e` and `⟨c†c⟩` over the final window.
    pub variation: f64,
    pub classification: SteadyStateClass,
}

/// Classify the end of a run. The traces must vary by less than `1e−3` over
/// the final `t_window`.
pub fn classify_steady_state(
    series: &TimeSeries,
    t_window: f64,
) -> Result<SteadyStateReport, ExperimentError> {
    let t_end = *series.times().last().ok_or(ExperimentError::NotSteady {
        variation: f64::NAN,
    })?;
    let tail = series.after(t_end - t_window);
    let spread = |name: &str| -> Result<f64, ExperimentError> {
        let v = tail.trace(name)?;
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        Ok(hi - lo)
    };
    let variation = spread("P_e")?.max(spread("n_c")?);
    if !(variation < 1e-3) {
        return Err(ExperimentError::NotSteady { variation });
    }
    let p_e_final = *series.trace("P_e")?.last().unwrap_or(&f64::NAN);
    let n_c_final = *series.trace("n_c")?.last().unwrap_or(&f64::NAN);
    let classification = if p_e_final > 0.9 && n_c_final < 0.1 {
        SteadyStateClass::AtomExcitedCavityVacuum
    } else {
        SteadyStateClass::Mixed
    };
    Ok(SteadyStateReport {
        p_e_final,
        n_c_final,
        variation,
        classification,
    })
}

/// Run a preset and classify its final window.
pub fn steady_state_report(
    preset: &ExperimentPreset,
    t_window: f64,
) -> Result<SteadyStateReport, ExperimentError> {
    let ev = execute(preset)?.evolution;
    classify_steady_state(&ev.series, t_window)
}

/// Full (rotating-only) against effective master equation on a rotating-family preset.
pub fn compare_preset(
    preset: &ExperimentPreset,
    tol: f64,
) -> Result<ComparisonReport, ExperimentError> {
    let setup = ComparisonSetup {
        n_a: preset.truncation.n_a.max(2),
        n_c: preset.truncation.n_c,
        rwa: Rwa::RotatingOnly,
    };
    Ok(compare_full_vs_effective(
        &preset.params,
        &setup,
        &preset.integrator,
        tol,
    )?)
}

/// Tolerance on `P_e` and `⟨c†c⟩` for the full-versus-effective comparison.
pub const COMPARE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
struct CompareManifest {
    code_version: String,
    table: &'static str,
    max_dev_pe: f64,
    max_dev_nc: f64,
    tolerance: f64,
    passed: bool,
    experiment: ExperimentPreset,
}

/// Run the comparison for `name` and write `compare.csv` plus a manifest.
pub fn compare_to_dir(name: PresetName, out: &Path) -> Result<ComparisonReport, ExperimentError> {
    if name.family() != Family::Rotating {
        return Err(ExperimentError::InvalidArgument(format!(
            "compare needs a rotating-channel preset, got {name}"
        )));
    }
    let mut preset = resolve_preset(name)?;
    if preset.model.is_reduced() {
        preset.truncation.n_a = 4;
    }
    let report = compare_preset(&preset, COMPARE_TOLERANCE)?;
    let (f, e) = (&report.full, &report.effective);
    let cols = [
        f.trace("P_e")?,
        f.trace("n_c")?,
        e.trace("P_e")?,
        e.trace("n_c")?,
    ];
    let rows = (0..f.len()).map(|i| {
        let mut row = vec![f.times()[i]];
        row.extend(cols.iter().map(|c| c[i]));
        row
    });
    let mut buf = Vec::new();
    write_table(
        &mut buf,
        &["t", "P_e_full", "n_c_full", "P_e_eff", "n_c_eff"],
        rows,
    )
    .map_err(|err| ExperimentError::io(out, err))?;
    write_file(out, "compare.csv", &buf)?;
    let manifest = CompareManifest {
        code_version: code_version(),
        table: "compare.csv",
        max_dev_pe: report.max_dev_pe,
        max_dev_nc: report.max_dev_nc,
        tolerance: report.tolerance,
        passed: report.passed,
        experiment: preset,
    };
    write_file(out, MANIFEST_FILE, to_toml(&manifest)?.as_bytes())?;
    Ok(report)
}

/// `n` points spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| lo * (ratio * k as f64).exp()).collect()
}

/// Default `κ₁` grid of the breakdown sweep.
pub fn default_kappa1_grid() -> Vec<f64> {
    geometric_grid(100.0, 4000.0, 10)
}

/// Sweep `κ₁` on the Fig. 4b parameters.
pub fn kappa1_sweep(values: &[f64], opts: &SweepOptions) -> Result<SweepReport, ExperimentError> {
    let preset = resolve_preset(PresetName::Fig4b)?;
    Ok(kappa1_breakdown_sweep(&preset.params, values, opts)?)
}

#[derive(Debug, Clone, Serialize)]
struct SweepManifest {
    code_version: String,
    table: &'static str,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossing: Option<f64>,
    period: f64,
    n_c_truncation: usize,
    refine_points: usize,
    experiment: ExperimentPreset,
}

/// Write `sweep.csv` (`kappa1, max_n_c`) and a manifest.
pub fn write_sweep(
    report: &SweepReport,
    opts: &SweepOptions,
    out: &Path,
) -> Result<PathBuf, ExperimentError> {
    let mut buf = Vec::new();
    write_table(
        &mut buf,
        &["kappa1", "max_n_c"],
        report.points.iter().map(|p| vec![p.kappa1, p.max_nc]),
    )
    .map_err(|e| ExperimentError::io(out, e))?;
    let path = write_file(out, "sweep.csv", &buf)?;
    let manifest = SweepManifest {
        code_version: code_version(),
        table: "sweep.csv",
        threshold: report.threshold,
        crossing: report.crossing,
        period: report.t_final,
        n_c_truncation: opts.n_c,
        refine_points: opts.refine_points,
        experiment: resolve_preset(PresetName::Fig4b)?,
    };
    write_file(out, MANIFEST_FILE, to_toml(&manifest)?.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(100.0, 4000.0, 10);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 100.0);
        assert!((g[9] - 4000.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn baselines_have_unit_ratio() {
        for f in [ScanFamily::Fig2d, ScanFamily::Fig3c] {
            let b = f.analytic_coupling(f.baseline_rp()).unwrap();
            assert_eq!(b / b, 1.0);
        }
    }

    #[test]
    fn analytic_curve_dips_below_one() {
        let f = ScanFamily::Fig2d;
        let g0 = f.analytic_coupling(0.0).unwrap();
        let dip = (1..20)
            .map(|k| f.analytic_coupling(0.05 * k as f64).unwrap() / g0)
            .any(|r| r < 1.0);
        assert!(dip);
        assert!(f.analytic_coupling(4.0).unwrap() / g0 > 1.0);
    }

    #[test]
    fn zero_coupling_is_trivially_steady() {
        let mut preset = resolve_preset(PresetName::Fig3a).unwrap();
        preset.params.g = 0.0;
        preset.params.j = 0.0;
        preset.params.kappa1 = 0.0;
        preset.integrator = crate::experiment::etd_config(1e-2, 5.0, 50);
        let r = steady_state_report(&preset, 2.0).unwrap();
        assert_eq!(r.p_e_final, 0.0);
        assert_eq!(r.n_c_final, 0.0);
        assert_eq!(r.classification, SteadyStateClass::Mixed);
    }

    #[test]
    fn unsteady_window_is_an_error() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
        let pe: Vec<f64> = t.iter().map(|x| x.cos().powi(2)).collect();
        let nc: Vec<f64> = pe.iter().map(|p| 1.0 - p).collect();
        let s = TimeSeries::new(t, vec![("P_e".into(), pe), ("n_c".into(), nc)]).unwrap();
        assert!(matches!(
            classify_steady_state(&s, 3.0),
            Err(ExperimentError::NotSteady { .. })
        ));
    }

    #[test]
    fn overrides() {
        let p = resolve_preset(PresetName::Fig2a).unwrap();
        let o = RunOverrides {
            rwa: true,
            t_final: Some(10.0),
            truncation: Some(Truncation { n_a: 3, n_c: 2 }),
        };
        let q = apply_overrides(p.clone(), &o).unwrap();
        assert_eq!(q.model, ModelKind::SqueezedRotating);
        assert_eq!(q.truncation, Truncation { n_a: 3, n_c: 2 });
        assert_eq!(q.integrator.t_final, 10.0);
        assert_eq!(q.integrator.dt, p.integrator.dt);
        let r = resolve_preset(PresetName::Fig4a).unwrap();
        assert!(apply_overrides(
            r,
            &RunOverrides {
                rwa: true,
                ..Default::default()
            }
        )
        .is_err());
    }
}
