use std::path::PathBuf;
use std::process::ExitCode;

use berkdyn_cli::{run, CliError, Experiment, ExperimentConfig, Overrides};
use clap::{Parser, Subcommand};

/// Equidistribution, Green-function and proximity experiments on the
/// (Berkovich) projective line.
#[derive(Parser, Debug)]
#[command(name = "berkdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Sampling RNG seed; overrides `sample.rng_seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Largest iterate degree allowed.
    #[arg(long, global = true, value_name = "DEGREE")]
    budget: Option<u128>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Root measures of f^n = a against the equilibrium measure.
    Equidist,
    /// (1/d^n) log [f^n, a] at disk points.
    Condition3,
    /// Dynamical Green function at points.
    Green,
    /// Proximity, naive and weighted proximity at points.
    Proximity,
    /// Escape test for a polynomial.
    Escape,
    /// Newton polygon of f^n = a.
    Newton,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Experiment {
        match c {
            Command::Equidist => Experiment::Equidist,
            Command::Condition3 => Experiment::Condition3,
            Command::Green => Experiment::Green,
            Command::Proximity => Experiment::Proximity,
            Command::Escape => Experiment::Escape,
            Command::Newton => Experiment::Newton,
        }
    }
}

fn execute(cli: &Cli) -> Result<PathBuf, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let ov = Overrides { out: cli.out.clone(), seed: cli.seed, budget: cli.budget };
    let cfg = ExperimentConfig::load(path, &ov)?;
    run(cli.command.into(), &cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BERKDYN_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("berkdyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
