//! Command-line driver for the Rosenau solver, the Petviashvili profile
//! solver and the closed-form traveling waves.

mod commands;
mod error;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;
use settings::{CommandKind, Settings};

#[derive(Debug, Parser)]
#[command(name = "rosenau", version, about = "Spectral experiments for the generalized Rosenau equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve an initial condition with RK4 in Fourier space.
    #[command(allow_negative_numbers = true)]
    Solve(Settings),
    /// Compute a solitary-wave profile by Petviashvili iteration.
    #[command(allow_negative_numbers = true)]
    Profile(Settings),
    /// Sample a closed-form traveling wave.
    #[command(allow_negative_numbers = true)]
    Exact(Settings),
    /// Compute a profile and check its integral identities.
    #[command(allow_negative_numbers = true)]
    CheckIdentities(Settings),
    /// Temporal convergence study against a fine-step reference.
    #[command(allow_negative_numbers = true)]
    ConvergeTime(Settings),
    /// Spatial convergence study against a fine-grid reference.
    #[command(allow_negative_numbers = true)]
    ConvergeSpace(Settings),
    /// Overtaking collision of two solitary waves.
    #[command(allow_negative_numbers = true)]
    Collide(Settings),
}

impl Command {
    fn split(self) -> (CommandKind, Settings) {
        match self {
            Command::Solve(s) => (CommandKind::Solve, s),
            Command::Profile(s) => (CommandKind::Profile, s),
            Command::Exact(s) => (CommandKind::Exact, s),
            Command::CheckIdentities(s) => (CommandKind::CheckIdentities, s),
            Command::ConvergeTime(s) => (CommandKind::ConvergeTime, s),
            Command::ConvergeSpace(s) => (CommandKind::ConvergeSpace, s),
            Command::Collide(s) => (CommandKind::Collide, s),
        }
    }
}

fn resolve(kind: CommandKind, flags: Settings) -> Result<Settings, CliError> {
    let file = match &flags.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    flags.over(file).resolve(kind)
}

fn execute(kind: CommandKind, flags: Settings) -> Result<(), (Option<Settings>, CliError)> {
    let settings = resolve(kind, flags).map_err(|e| (None, e))?;
    let prepare = || -> Result<(), CliError> {
        std::fs::create_dir_all(settings.output_dir())?;
        rosenau::io::write_json(&settings.output_dir().join("config.json"), &settings)?;
        Ok(())
    };
    prepare().map_err(|e| (None, e))?;
    commands::run(kind, &settings).map_err(|e| (Some(settings.clone()), e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, flags) = cli.command.split();
    match execute(kind, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err((settings, e)) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            if let Some(s) = settings {
                let path = s.output_dir().join("error.json");
                if let Err(w) = rosenau::io::write_json(&path, &e.report()) {
                    eprintln!("error: could not write {}: {w}", path.display());
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
