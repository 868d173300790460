//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 capacity refusal.

use clap::{Parser, Subcommand, ValueEnum};
use pflab::assembly::Strategy;
use pflab::config::{parse_config, RunConfig, Scale, ScenarioKind};
use pflab::error::{Error, Result};
use pflab::solver::{convergence_sweep, ground_state};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "pflab",
    about = "Ground states of grid matter coupled to multimode photon fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Full,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Scale {
        match s {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Full => Scale::Full,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Execute the scenario of a configuration and write its result files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's scale (desk | full).
        #[arg(long)]
        scale: Option<ScaleArg>,
        /// Worker threads; falls back to PFLAB_THREADS, then the config.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace existing output files.
        #[arg(long)]
        overwrite: bool,
    },
    /// Print the available scenario names.
    ListScenarios,
    /// Parse and validate a configuration without solving anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the Fock-cutoff convergence sweep for the config's exact strategy.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() {
    let code = match dispatch() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn dispatch() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, scale, threads, out, overwrite } => {
            let mut cfg = load(&config)?;
            if let Some(s) = scale {
                cfg.scenario.scale = s.into();
            }
            if let Some(dir) = out {
                cfg.run.output_dir = dir.display().to_string();
            }
            if overwrite {
                cfg.run.overwrite = true;
            }
            init_threads(threads, &cfg)?;
            let output = pflab::experiments::run_scenario(&cfg)?;
            let written = pflab::output::write_scenario(
                Path::new(&cfg.run.output_dir),
                &output,
                &cfg,
                cfg.run.overwrite,
            )?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::ListScenarios => {
            for kind in ScenarioKind::ALL {
                println!("{}", kind.name());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!(
                "ok: scenario {} ({} strategies, scale {:?})",
                cfg.scenario.name.name(),
                cfg.strategies.list.len(),
                cfg.scenario.scale
            );
            Ok(())
        }
        Command::Certify { config, threads } => {
            let cfg = load(&config)?;
            init_threads(threads, &cfg)?;
            certify(&cfg)
        }
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

fn init_threads(flag: Option<usize>, cfg: &RunConfig) -> Result<()> {
    let n = flag
        .or_else(|| {
            std::env::var("PFLAB_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(cfg.run.threads);
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Solve the exact strategy along a cutoff ladder and report the increments.
fn certify(cfg: &RunConfig) -> Result<()> {
    let matter: Arc<pflab::matter::MatterOperator> = Arc::new(match cfg.matter.kind_name() {
        "atom" => pflab::matter::build_atom(&cfg.matter.atom_model()?)?,
        "ring" => pflab::matter::build_ring(&cfg.matter.ring_model()?)?,
        _ => {
            // The molecule PES needs a distance; certify at the reference
            // equilibrium separation.
            pflab::matter::build_molecule_electronic(&cfg.matter.molecule_model()?, 1.9)?
        }
    });
    let lambda = if cfg.bath.lambda > 0.0 {
        cfg.bath.lambda
    } else {
        cfg.sweep.lambda_grid.iter().copied().fold(0.0, f64::max)
    };
    let bath = match (cfg.sweep.lambda_x, cfg.sweep.lambda_y) {
        (Some(lx), Some(ly)) => cfg.bath.sample(1.0)?.with_polarization_couplings(&[lx, ly])?,
        _ => cfg.bath.sample(lambda)?,
    };
    let opts = cfg.assembly_options();
    let cutoffs: Vec<u32> = (cfg.truncation.cutoff..=cfg.truncation.certify_cutoff()).collect();
    let sweep = convergence_sweep(
        |cutoff| {
            pflab::assembly::assemble_strategy(
                matter.clone(),
                &bath,
                Strategy::Exact,
                cfg.truncation.truncation().with_cutoff(cutoff),
                &opts,
                &cfg.solver,
            )
        },
        &cutoffs,
        &cfg.solver,
    )?;
    println!("cutoff,energy");
    for (c, e) in &sweep.entries {
        println!("{c},{e:.12e}");
    }
    let shift = sweep.final_shift();
    let ok = shift <= cfg.truncation.certify_threshold;
    println!(
        "final_shift {shift:.3e} threshold {:.3e} certified {ok}",
        cfg.truncation.certify_threshold
    );
    // A quick residual echo of the largest solve for the metadata-minded.
    let op = pflab::assembly::assemble_strategy(
        matter,
        &bath,
        Strategy::Exact,
        cfg.truncation.truncation(),
        &opts,
        &cfg.solver,
    )?;
    let gs = ground_state(&op, &cfg.solver)?;
    println!("residual {:.3e} iterations {}", gs.residual, gs.iterations);
    if ok {
        Ok(())
    } else {
        Err(Error::SolverStalled { residual: shift, iterations: gs.iterations })
    }
}
