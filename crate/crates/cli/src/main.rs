//! `sssim` command-line front end.
//!
//! Exit codes: 0 success, 2 config, 3 physics precondition, 4 numerical
//! non-convergence, 5 I/O. Failures print one line to stderr:
//! `sssim: error class=<class> code=<n>: <message>`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sssim_core::config::{parse_config_detailed, parse_registry};
use sssim_core::run::{config_hash, list_materials, resolve_output_dir, run, OUT_ENV};
use sssim_core::Error;

#[derive(Debug, Parser)]
#[command(name = "sssim", version, about = "Gate-modulated SC-Sm-SC junction simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the analysis described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and SSSIM_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sweeps (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Print the summary report to stdout.
        #[arg(long)]
        verbose: bool,
    },
    /// List the material registry.
    Materials {
        /// Include materials registered by this config file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Parse and validate a config file without running it.
    Check { config: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            verbose,
        } => {
            let parsed = parse_config_detailed(&read(&config)?)?;
            let env = std::env::var(OUT_ENV).ok();
            let dir = resolve_output_dir(out.as_deref(), &parsed.config, env.as_deref());
            let outcome = run(&parsed, &dir, jobs)?;
            if verbose {
                print!("{}", outcome.artifacts.summary);
            } else {
                for w in &outcome.artifacts.warnings {
                    eprintln!("sssim: warning: {w}");
                }
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
        }
        Command::Materials { config } => {
            let registry = match config {
                Some(path) => parse_registry(&read(&path)?)?,
                None => parse_registry("")?,
            };
            print!("{}", list_materials(&registry));
        }
        Command::Check { config } => {
            let parsed = parse_config_detailed(&read(&config)?)?;
            println!(
                "ok analysis={} config_sha256={}",
                parsed.config.analysis.name(),
                config_hash(&parsed.config)
            );
            for w in &parsed.warnings {
                println!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            let message = e.to_string().replace(['\n', '\r'], " ");
            eprintln!(
                "sssim: error class={} code={}: {message}",
                class.as_str(),
                class.exit_code()
            );
            ExitCode::from(class.exit_code())
        }
    }
}
