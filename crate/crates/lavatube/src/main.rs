use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lavatube::commands::{self, load_config, CliError, Overrides};

/// Multi-robot lava tube exploration simulator.
#[derive(Parser)]
#[command(name = "lavatube", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; the built-in reference config when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Timesteps to render, e.g. 0,5,10
    #[arg(long, global = true, value_delimiter = ',')]
    frames: Option<Vec<u32>>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Explorer counts, e.g. 6,15
    #[arg(long, global = true, value_delimiter = ',')]
    robots: Option<Vec<usize>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CommsMode {
    Range,
    Time,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded exploration and write coverage, snapshots and frames
    Explore {
        #[command(flatten)]
        common: Common,
    },
    /// Hop budget table for each body and hop distance
    SweepHops {
        #[command(flatten)]
        common: Common,
    },
    /// Link budget and range, or relay chain transmission times
    Comms {
        #[arg(long, value_enum, default_value = "range")]
        mode: CommsMode,
        #[command(flatten)]
        common: Common,
    },
    /// Mean and standard deviation of coverage over seeded trials
    MonteCarlo {
        #[command(flatten)]
        common: Common,
    },
    /// Re-render SVG frames from a snapshots.jsonl file
    Render {
        /// Snapshot file; defaults to <out>/snapshots.jsonl
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn prepare(common: &Common) -> Result<lavatube::Config, CliError> {
    let config = load_config(common.config.as_deref())?;
    Overrides {
        seed: common.seed,
        out: common.out.clone(),
        frames: common.frames.clone(),
        trials: common.trials,
        robots: common.robots.clone(),
    }
    .apply(config)
}

fn list(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Explore { common } => {
            let config = prepare(&common)?;
            let out = commands::explore(&config)?;
            println!(
                "seed {} final coverage {:.4} hops {} delta-v {:.3} m/s",
                config.seed, out.trial.final_coverage, out.trial.hop_count, out.trial.total_delta_v
            );
            list(&out.files);
        }
        Command::SweepHops { common } => {
            let config = prepare(&common)?;
            let (rows, path) = commands::sweep_hops(&config)?;
            for r in rows {
                println!("{:<6} {:>8.2} m {:>6} hops {:>10.1} m", r.body, r.hop_distance_m, r.n_hops, r.total_distance_m);
            }
            list(&[path]);
        }
        Command::Comms { mode, common } => {
            let config = prepare(&common)?;
            match mode {
                CommsMode::Range => print!("{}", commands::comms_range_report(&config)?),
                CommsMode::Time => {
                    let (rows, path) = commands::comms_time(&config)?;
                    for r in rows {
                        println!("{:>3} hops {:>12.3} s", r.hops, r.total_time_s);
                    }
                    list(&[path]);
                }
            }
        }
        Command::MonteCarlo { common } => {
            let config = prepare(&common)?;
            let (stats, path) = commands::monte_carlo(&config)?;
            for s in stats {
                let last = s.mean.len() - 1;
                println!(
                    "{:>3} robots, {} trials: final coverage {:.4} +/- {:.4}",
                    s.robot_count, s.trials, s.mean[last], s.std[last]
                );
            }
            list(&[path]);
        }
        Command::Render { snapshots, common } => {
            let config = prepare(&common)?;
            let src = snapshots.unwrap_or_else(|| PathBuf::from(&config.output_dir).join("snapshots.jsonl"));
            list(&commands::render(&config, &src)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
