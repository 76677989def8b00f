use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use cqed_squeeze::effective::SweepOptions;
use cqed_squeeze::experiment::{
    apply_overrides, compare_to_dir, default_kappa1_grid, enhancement_scan, kappa1_sweep,
    load_config, resolve_preset, run_to_dir, write_scan, write_sweep, PresetName, RunOverrides,
    ScanFamily, Truncation,
};

#[derive(Parser)]
#[command(
    name = "cqed-squeeze",
    version,
    about = "Squeezing-enhanced coupled-cavity QED simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a config file and write series.csv and manifest.toml.
    Run {
        /// Preset name (fig2a, fig2b_scaled, fig2c, fig2d, fig3a, fig3b, fig3c, fig4a, fig4b).
        #[arg(required_unless_present = "config", conflicts_with = "config")]
        preset: Option<String>,
        /// TOML run description or a previous manifest.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Drop the counter-rotating terms.
        #[arg(long)]
        rwa: bool,
        #[arg(long)]
        t_final: Option<f64>,
        /// Fock truncations as n_a,n_c.
        #[arg(long)]
        truncation: Option<Truncation>,
    },
    /// Enhancement ratio versus squeezing.
    Scan {
        #[arg(long)]
        family: ScanFamily,
        /// Comma-separated r_p values.
        #[arg(long, value_delimiter = ',', required = true)]
        rp: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full master equation against the effective one.
    Compare {
        #[arg(long, default_value = "fig2c")]
        preset: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// First-period maximum of the auxiliary-cavity photon number versus kappa1.
    SweepKappa1 {
        /// Comma-separated kappa1 values; defaults to 10 geometric points from 100 to 4000.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Extra points inserted around the 0.5 crossing.
        #[arg(long, default_value_t = 8)]
        refine: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            preset,
            config,
            out,
            rwa,
            t_final,
            truncation,
        } => {
            let base = match (preset, config) {
                (Some(name), None) => resolve_preset(name.parse::<PresetName>()?)?,
                (None, Some(path)) => load_config(&path)
                    .with_context(|| format!("reading config {}", path.display()))?,
                _ => bail!("give either a preset name or --config"),
            };
            let preset = apply_overrides(
                base,
                &RunOverrides {
                    rwa,
                    t_final,
                    truncation,
                },
            )?;
            let res =
                run_to_dir(&preset, &out).with_context(|| format!("running {}", preset.name))?;
            println!(
                "{}: {} rows in {:.2} s -> {}",
                preset.name,
                res.manifest.stats.rows,
                res.manifest.stats.wall_time_s,
                res.series_path.display()
            );
            if let Some(p) = &res.manifest.period {
                match p.analytic {
                    Some(a) => {
                        println!("period({}) = {:.6} (analytic {:.6})", p.trace, p.period, a)
                    }
                    None => println!("period({}) = {:.6}", p.trace, p.period),
                }
            }
            if !res.manifest.stats.state_valid {
                eprintln!("warning: state diagnostics exceeded tolerance, see manifest");
            }
        }
        Command::Scan { family, rp, out } => {
            let report = enhancement_scan(family, &rp)?;
            let path = write_scan(&report, &out)?;
            println!(
                "baseline r_p = {} period {:.6}",
                report.baseline_rp, report.baseline_period
            );
            for r in &report.rows {
                let num = r
                    .ratio_numeric
                    .map(|x| format!("{x:.4}"))
                    .unwrap_or_else(|| "-".into());
                println!(
                    "r_p = {:<5} numeric {:>8}  analytic {:.4}{}",
                    r.r_p,
                    num,
                    r.ratio_analytic,
                    if r.invalid_region {
                        "  (ratio < 1)"
                    } else {
                        ""
                    }
                );
            }
            println!("-> {}", path.display());
        }
        Command::Compare { preset, out } => {
            let name: PresetName = preset.parse()?;
            let r = compare_to_dir(name, &out)?;
            println!(
                "max |dP_e| = {:.4e}, max |dn_c| = {:.4e}, tolerance {} -> {}",
                r.max_dev_pe,
                r.max_dev_nc,
                r.tolerance,
                if r.passed { "agree" } else { "differ" }
            );
        }
        Command::SweepKappa1 {
            values,
            refine,
            out,
        } => {
            let values = if values.is_empty() {
                default_kappa1_grid()
            } else {
                values
            };
            let opts = SweepOptions {
                refine_points: refine,
                ..SweepOptions::default()
            };
            let report = kappa1_sweep(&values, &opts)?;
            let path = write_sweep(&report, &opts, &out)?;
            match report.crossing {
                Some(k) => println!(
                    "max n_c drops below {} at kappa1 = {:.1}",
                    report.threshold, k
                ),
                None => println!("no crossing of {} within the sweep", report.threshold),
            }
            println!("-> {}", path.display());
        }
    }
    Ok(())
}
