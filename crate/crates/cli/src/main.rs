use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hiss_cli::config::ExperimentConfig;
use hiss_cli::runner::write_enumeration;

#[derive(Parser)]
#[command(name = "hiss", version, about = "Discrete MCMC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Master seed (overrides run.seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides run.out_dir)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (overrides run.workers)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every chain of an experiment and write its artifacts
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write the exact target distribution as state,probability rows
    Enumerate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sweep one sampler parameter over a grid of values
    Ablation {
        config: PathBuf,
        /// alpha, eta, sweeps_g, refinements_l, gl (GxL) or steps_per_sample
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. 0.01,0.1,1,4 or 10x1,5x2
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &PathBuf, o: &Overrides) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(s) = o.seed {
        cfg.run.seed = s;
    }
    if let Some(d) = &o.out_dir {
        cfg.run.out_dir = d.clone();
    }
    if let Some(w) = o.workers {
        cfg.run.workers = w;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let report = hiss_cli::run(&cfg)?;
            let nfe = &report.nfe;
            println!(
                "{} chains x {} samples of {} -> {}",
                cfg.run.chains,
                cfg.run.samples,
                cfg.sampler.name,
                cfg.run.out_dir.display()
            );
            println!("energy calls: measured {} predicted {}", nfe.measured, nfe.predicted);
            for m in cfg.metrics() {
                if let Some(v) = report.mean_final(m) {
                    println!("final {} (chain mean): {v:.6}", m.as_str());
                }
            }
            if !nfe.matches() {
                anyhow::bail!("energy-call accounting mismatch");
            }
        }
        Command::Enumerate { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let rows = hiss_cli::enumerate(&cfg)?;
            let path = cfg.run.out_dir.join("exact.csv");
            write_enumeration(&rows, &path)?;
            println!("{} states -> {}", rows.len(), path.display());
        }
        Command::Ablation {
            config,
            param,
            grid,
            overrides,
        } => {
            let cfg = load(&config, &overrides)?;
            let (rows, _) = hiss_cli::ablation(&cfg, &param, &grid, true)?;
            for r in rows {
                println!(
                    "{}={}: logMAE {:?} MwG {:?} coverage {:?}",
                    r.param, r.value, r.log_mae_mean, r.mwg_acceptance_mean, r.coverage_mean
                );
            }
        }
    }
    Ok(())
}
