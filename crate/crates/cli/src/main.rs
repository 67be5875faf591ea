// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nmr_krotov::pulse_table::read_pulse_table;
use nmr_krotov_cli::run::{self, CliError};
use nmr_krotov_cli::{load_config, RunConfig};

#[derive(Parser)]
#[command(name = "nmr-krotov", version, about = "Optimal-control pulse design for NMR spin systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides run.output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a pulse sequence.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated iterations to snapshot.
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<usize>>,
        /// Write amplitude/phase columns instead of x/y.
        #[arg(long)]
        export_phase_amp: bool,
    },
    /// Score a pulse table and simulate its spectrum.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pulse: PathBuf,
    },
    /// Excitation efficiency of a pulse table against quadrupole coupling.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pulse: PathBuf,
    },
    /// Run every configured method from every configured seed.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

fn out_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.run.output_dir))
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    Ok(load_config(path)?)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Optimize {
            common,
            seed,
            snapshots,
            export_phase_amp,
        } => {
            let mut cfg = load(&common.config)?;
            if let Some(seed) = seed {
                cfg.run.seed = seed;
            }
            if let Some(snapshots) = snapshots {
                cfg.run.snapshots = snapshots;
            }
            cfg.run.export_phase_amp |= export_phase_amp;
            let s = run::optimize(&cfg, &out_dir(&common, &cfg))?;
            println!(
                "{} {}: efficiency {:.6}, {} iterations ({})",
                s.score.kind, s.method, s.score.mean_efficiency, s.iterations, s.termination
            );
        }
        Command::Simulate { common, pulse } => {
            let cfg = load(&common.config)?;
            let seq = read_pulse_table(&pulse)?;
            let s = run::simulate(&cfg, &seq, &out_dir(&common, &cfg))?;
            println!("{}: efficiency {:.6}", s.kind, s.mean_efficiency);
        }
        Command::Profile { common, pulse } => {
            let cfg = load(&common.config)?;
            let seq = read_pulse_table(&pulse)?;
            let points = run::profile(&cfg, &seq, &out_dir(&common, &cfg))?;
            for (wq, e) in points {
                println!("{wq:8.3} Hz  {e:.6}");
            }
        }
        Command::Compare { common } => {
            let cfg = load(&common.config)?;
            let s = run::compare(&cfg, &out_dir(&common, &cfg))?;
            for m in &s.methods {
                println!(
                    "{}: {}/{} above {}, mean {:.4}, best {:.4}",
                    m.method, m.successes, m.runs, s.success_threshold, m.mean_efficiency, m.best_efficiency
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
