use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use epb_core::config::{ConfigFile, NewtonParams};
use epb_core::harness::{
    branch_campaign, comparison_table, damping_table, emit_report, errors_table, failures_table, field_tables,
    observed_orders, riemann_campaign, riemann_table, soliton_campaign, BranchCampaign, BranchCase, CellFailure,
    ErrorRow, RiemannCampaign, SchemeTuning, SolitonCampaign, Table,
};
use epb_core::soliton::SolitonParams;
use epb_core::stability::stability_map;
use epb_core::Variant;

#[derive(Parser, Debug)]
#[command(
    name = "epb-lab",
    version,
    about = "EPB/REPB asymptotic-preserving plasma benchmarks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV tables and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Comma-separated cell counts.
    #[arg(long, global = true, value_delimiter = ',')]
    grids: Option<Vec<usize>>,
    /// Comma-separated Debye lengths.
    #[arg(long, global = true, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    variant: Option<VariantArg>,
    /// Kept for compatibility: every mode is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Epb,
    Repb,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Soliton errors at t_L/5 and peak damping up to 2 t_L.
    Soliton {
        #[arg(long, default_value_t = 1.3)]
        u0: f64,
        #[arg(long, default_value_t = -1e-4, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, default_value_t = 1e-3)]
        dx_ref: f64,
        /// Grids for the damping study.
        #[arg(long, value_delimiter = ',', default_value = "1000,16000")]
        damping_grids: Vec<usize>,
    },
    /// Colliding-stream shock tube on [-0.2, 0.2].
    Riemann {
        /// Snapshot times.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2")]
        times: Vec<f64>,
    },
    /// Gaussian bump with u = sin^3 x on [0, 2 pi].
    Branch5(BranchArgs),
    /// Gaussian bump with u = sin 2x cos x on [0, 2 pi].
    Branch7(BranchArgs),
    /// Largest root modulus at delta = fraction * C * h for the optimal viscosity.
    StabilityMap {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        h: Vec<f64>,
        #[arg(long, default_value_t = 0.99)]
        fraction: f64,
    },
    /// Soliton error table with observed orders (no damping runs).
    Convergence {
        #[arg(long, default_value_t = 1.3)]
        u0: f64,
        #[arg(long, default_value_t = -1e-4, allow_hyphen_values = true)]
        eta: f64,
    },
}

#[derive(Args, Debug)]
struct BranchArgs {
    #[arg(long)]
    t_end: Option<f64>,
    /// Reference resolution (default: max(32000, 4 x finest grid)).
    #[arg(long)]
    reference_cells: Option<usize>,
}

struct Settings {
    file: ConfigFile,
    tuning: SchemeTuning,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => ConfigFile::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => ConfigFile::default(),
        };
        if file.boundary.is_some() || file.x_min.is_some() || file.x_max.is_some() {
            log::warn!("boundary and domain keys are fixed by each benchmark and are ignored");
        }
        let mut newton = NewtonParams::default();
        if let Some(t) = file.newton_tol {
            newton.tol_residual = t;
        }
        if let Some(m) = file.newton_max_iter {
            newton.max_iter = m;
        }
        let tuning = SchemeTuning {
            cfl: file.cfl.unwrap_or(epb_core::config::DEFAULT_CFL),
            newton,
            dissipation: file.dissipation.unwrap_or_default(),
        };
        Ok(Self { file, tuning })
    }
}

fn variants(common: &Common, file: &ConfigFile) -> Vec<Variant> {
    match common.variant {
        Some(VariantArg::Epb) => vec![Variant::Epb],
        Some(VariantArg::Repb) => vec![Variant::Repb],
        Some(VariantArg::Both) => Variant::ALL.to_vec(),
        None => file.variant.map_or_else(|| Variant::ALL.to_vec(), |v| vec![v]),
    }
}

fn grids(common: &Common, file: &ConfigFile, default: &[usize]) -> Vec<usize> {
    common
        .grids
        .clone()
        .or_else(|| file.n_cells.map(|n| vec![n]))
        .unwrap_or_else(|| default.to_vec())
}

fn lambdas(common: &Common, file: &ConfigFile, default: &[f64]) -> Vec<f64> {
    common
        .lambda
        .clone()
        .or_else(|| file.lambda.map(|l| vec![l]))
        .unwrap_or_else(|| default.to_vec())
}

fn print_orders(rows: &[ErrorRow]) {
    for v in Variant::ALL {
        let mut r: Vec<&ErrorRow> = rows.iter().filter(|r| r.variant == v).collect();
        if r.is_empty() {
            continue;
        }
        r.sort_by_key(|r| r.n_cells);
        for (name, pick) in [
            ("n", (|r: &ErrorRow| r.eps_n) as fn(&ErrorRow) -> f64),
            ("q", |r| r.eps_q),
            ("phi", |r| r.eps_phi),
        ] {
            let eps: Vec<f64> = r.iter().map(|r| pick(r)).collect();
            let orders: Vec<String> = observed_orders(&eps).iter().map(|o| format!("{o:.2}")).collect();
            println!("{v} eps_{name} orders: [{}]", orders.join(", "));
        }
    }
}

fn finish(tables: Vec<Table>, failures: &[CellFailure], config_text: &str, out: &Path) -> Result<bool> {
    let mut tables = tables;
    tables.push(failures_table("failures", failures));
    let files = emit_report(&tables, config_text, out)?;
    println!("wrote {} files to {}", files.len(), out.display());
    for f in failures {
        eprintln!(
            "failure: {} lambda={} N={}: {}",
            f.variant, f.lambda, f.n_cells, f.message
        );
    }
    Ok(failures.is_empty())
}

fn soliton_params(u0: f64, eta: f64, dx_ref: f64) -> SolitonParams {
    SolitonParams {
        u0,
        eta,
        dx_ref,
        ..SolitonParams::default()
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let settings = Settings::load(cli.common.config.as_deref())?;
    let common = &cli.common;
    let file = &settings.file;
    match &cli.command {
        Command::Soliton {
            u0,
            eta,
            dx_ref,
            damping_grids,
        } => {
            let campaign = SolitonCampaign {
                params: soliton_params(*u0, *eta, *dx_ref),
                grids: grids(common, file, &SolitonCampaign::default().grids),
                variants: variants(common, file),
                damping_grids: damping_grids.clone(),
                damping_intervals: 10,
                tuning: settings.tuning,
            };
            let out = soliton_campaign(&campaign)?;
            println!("pulse support L = {}, t_L = {}", out.support, out.t_l);
            print_orders(&out.errors);
            let mut tables = vec![
                errors_table("soliton_errors", &out.errors),
                comparison_table("soliton_table", &out.errors, 1.0),
                damping_table("soliton_damping", &out.damping),
            ];
            tables.extend(field_tables(&out.snapshots));
            finish(tables, &out.failures, &format!("{campaign:?}"), &common.out)
        }
        Command::Convergence { u0, eta } => {
            let campaign = SolitonCampaign {
                params: soliton_params(*u0, *eta, SolitonParams::default().dx_ref),
                grids: grids(common, file, &[250, 500, 1000, 2000, 4000]),
                variants: variants(common, file),
                damping_grids: Vec::new(),
                damping_intervals: 10,
                tuning: settings.tuning,
            };
            let out = soliton_campaign(&campaign)?;
            print_orders(&out.errors);
            let tables = vec![
                errors_table("convergence_errors", &out.errors),
                comparison_table("convergence_table", &out.errors, 1.0),
            ];
            finish(tables, &out.failures, &format!("{campaign:?}"), &common.out)
        }
        Command::Riemann { times } => {
            let mut t_snapshots = times.clone();
            if let Some(t) = file.t_end {
                if !t_snapshots.contains(&t) {
                    t_snapshots.push(t);
                }
            }
            let campaign = RiemannCampaign {
                lambdas: lambdas(common, file, &RiemannCampaign::default().lambdas),
                grids: grids(common, file, &RiemannCampaign::default().grids),
                variants: variants(common, file),
                t_snapshots,
                tuning: settings.tuning,
            };
            let out = riemann_campaign(&campaign);
            for m in &out.metrics {
                println!(
                    "{} lambda={:e} N={} t={}: plateau {:.4}, shock speed {:.4}, TV {:.4}",
                    m.variant, m.lambda, m.n_cells, m.t, m.plateau, m.shock_speed, m.total_variation
                );
            }
            let mut tables = vec![riemann_table("riemann_metrics", &out.metrics)];
            tables.extend(field_tables(&out.snapshots));
            finish(tables, &out.failures, &format!("{campaign:?}"), &common.out)
        }
        Command::Branch5(args) | Command::Branch7(args) => {
            let case = if matches!(cli.command, Command::Branch5(_)) {
                BranchCase::FiveBranch
            } else {
                BranchCase::SevenBranch
            };
            let defaults = BranchCampaign::new(case);
            let campaign = BranchCampaign {
                case,
                lambdas: lambdas(common, file, &defaults.lambdas),
                grids: grids(common, file, &defaults.grids),
                variants: variants(common, file),
                t_end: args.t_end.or(file.t_end).unwrap_or(defaults.t_end),
                reference_cells: args.reference_cells,
                tuning: settings.tuning,
            };
            let out = branch_campaign(&campaign);
            let mut tables = vec![errors_table(&format!("{}_errors", case.name()), &out.errors)];
            for &l in &campaign.lambdas {
                tables.push(comparison_table(
                    &format!("{}_table_lambda{l:e}", case.name()),
                    &out.errors,
                    l,
                ));
            }
            tables.extend(field_tables(&out.snapshots));
            tables.extend(field_tables(&out.references).into_iter().map(|mut t| {
                t.name = format!("reference_{}", t.name);
                t
            }));
            for r in &out.errors {
                println!(
                    "{} lambda={:e} N={}: eps_phi {:.3e}",
                    r.variant, r.lambda, r.n_cells, r.eps_phi
                );
            }
            finish(tables, &out.failures, &format!("{campaign:?}"), &common.out)
        }
        Command::StabilityMap { h, fraction } => {
            if !(*fraction > 0.0) {
                bail!("fraction must be positive");
            }
            let lambdas = lambdas(common, file, &[1.0, 1e-2, 1e-4, 1e-8]);
            let mut table = Table::new(
                "stability_map",
                &["variant", "lambda", "h", "delta", "c", "max_modulus", "stable"],
            );
            let mut all_stable = true;
            for v in variants(common, file) {
                for row in stability_map(v, &lambdas, h, *fraction)? {
                    all_stable &= row.stable;
                    table.push(vec![
                        row.variant.name().into(),
                        row.lambda.to_string(),
                        row.h.to_string(),
                        row.delta.to_string(),
                        row.c.to_string(),
                        row.max_modulus.to_string(),
                        row.stable.to_string(),
                    ]);
                }
            }
            println!("all sampled configurations stable: {all_stable}");
            let config_text = format!("stability-map {lambdas:?} {h:?} {fraction}");
            finish(vec![table], &[], &config_text, &common.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
