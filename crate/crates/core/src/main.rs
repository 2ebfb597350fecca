use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use m5x::config::{load_config, run, Command};

/// Closed-form extremes of M5 processes and their Monte Carlo verification.
#[derive(Debug, Parser)]
#[command(name = "m5x", version)]
struct Cli {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Command to run; defaults to the config's `commands` list.
    #[arg(long, value_enum)]
    command: Option<Command>,
    /// Overrides `sim.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `experiment.output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 = one per core.
    #[arg(long, env = "M5X_THREADS", default_value_t = 0)]
    threads: usize,
}

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut cfg = match load_config(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("m5x: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("m5x: cannot start thread pool: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }

    let commands = match cli.command {
        Some(c) => vec![c],
        None => cfg.commands.clone(),
    };
    let mut failed = false;
    for command in commands {
        match run(&cfg, command) {
            Ok(outcome) => {
                print!("{}", outcome.summary);
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
                failed |= !outcome.passed;
            }
            Err(e) => {
                eprintln!("m5x: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
        }
    }
    if failed {
        ExitCode::from(EXIT_VERIFY_FAILED)
    } else {
        ExitCode::SUCCESS
    }
}
