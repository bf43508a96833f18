use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cqed::expcli::{execute, load_config, preset, write_outputs, ExperimentConfig, Scenario};
use cqed::Error;

/// Cavity QED experiments from TOML configuration files.
#[derive(Parser)]
#[command(name = "cqed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write its outputs.
    Run {
        config: PathBuf,
        /// Override the configured random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every available core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output directory; defaults to `<root>/<scenario>`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Root for default output directories.
        #[arg(long, env = "CQED_OUTPUT_ROOT", default_value = "runs")]
        output_root: PathBuf,
    },
    /// Validate a configuration and print its canonical form.
    Validate { config: PathBuf },
    /// List the available scenarios.
    Scenarios,
    /// Print the bundled example configuration for a scenario.
    Preset { scenario: String },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    load_config(path).map_err(|e| match e {
        Error::Config(errs) => {
            for msg in errs.0 {
                eprintln!("{}: {msg}", path.display());
            }
            ExitCode::from(EXIT_CONFIG)
        }
        other => {
            eprintln!("{}: {other}", path.display());
            ExitCode::from(EXIT_CONFIG)
        }
    })
}

fn run(cli: Cli) -> Result<(), ExitCode> {
    match cli.command {
        Command::Scenarios => {
            for s in Scenario::ALL {
                println!("{:<20} {}", s.name(), s.description());
            }
        }
        Command::Preset { scenario } => {
            let s: Scenario = scenario.parse().map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            })?;
            print!("{}", preset(s));
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            print!("{}", cfg.to_toml());
            eprintln!("{}: ok, {} sweep point(s)", config.display(), cfg.points.len());
        }
        Command::Run {
            config,
            seed,
            workers,
            output_dir,
            output_root,
        } => {
            let mut cfg = load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let dir = output_dir
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| output_root.join(cfg.scenario.name()));
            let runtime = |e: Error| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_RUNTIME)
            };
            let out = execute(&cfg, workers).map_err(runtime)?;
            let files = write_outputs(&cfg, &out, &dir).map_err(runtime)?;
            println!("{}: {} file(s) written to {}", cfg.scenario, files.len(), dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
