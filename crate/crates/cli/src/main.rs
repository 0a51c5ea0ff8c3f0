use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod fail;

use config::RunConfig;
use fail::{CliError, EXIT_MALFORMED};

#[derive(Parser)]
#[command(name = "reliefnav", version, about = "Disaster-relief drone base planning and road reconnaissance")]
struct Cli {
    /// Flat JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; required for every command that draws random numbers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Defaults to the number of CPUs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override any config key, e.g. `--set batch=1000`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the altitude/importance bundle from raw grids, roads or a synthetic template.
    BuildField,
    /// Site bases, assign drones and configure containers.
    Plan,
    /// Run a batch of reconnaissance walks and export the best home routes.
    Walk,
    /// Choose the exported route pair with the best combined coverage ratio.
    Pair,
    /// Parameter fits, coverage regression and neighbourhood rule comparison.
    Sensitivity,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg = cfg.apply_overrides(&cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = Some(jobs);
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        if jobs == 0 {
            return Err(CliError::new(EXIT_MALFORMED, "--jobs must be at least 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::new(EXIT_MALFORMED, e.to_string()))?;
    pool.install(|| match cli.command {
        Command::BuildField => commands::build_field(&cfg).map(|f| {
            let m = f.meta();
            println!("field {}x{} written to {}", m.n_rows, m.n_cols, cfg.field_dir().display());
        }),
        Command::Plan => commands::plan(&cfg),
        Command::Walk => commands::walk(&cfg),
        Command::Pair => commands::pair(&cfg),
        Command::Sensitivity => commands::sensitivity(&cfg),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors count as malformed input; help and version succeed.
            return if e.use_stderr() { ExitCode::from(EXIT_MALFORMED) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
