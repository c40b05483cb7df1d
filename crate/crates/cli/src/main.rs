use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrf_cli::{
    cmd_audit, cmd_classical_limit, cmd_husimi, cmd_margins, CliError, Outcome, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "qrf",
    version,
    about = "Frame-relative uncertainty audits for phase-space reference frames"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every configured scenario against its bound
    Audit(Common),
    /// Write the phase-space density of the system state as a CSV grid
    Husimi(Common),
    /// Verify margin identities of the phase-space and joint observables
    Margins(Common),
    /// Sweep frame squeezing towards the classical point
    ClassicalLimit(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides `output_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overrides `seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stdout
    #[arg(long)]
    quiet: bool,
}

type Handler = fn(&RunConfig) -> Result<Outcome, CliError>;

fn run(command: Command) -> Result<(Outcome, bool), CliError> {
    let (common, cmd): (Common, Handler) = match command {
        Command::Audit(c) => (c, cmd_audit),
        Command::Husimi(c) => (c, cmd_husimi),
        Command::Margins(c) => (c, cmd_margins),
        Command::ClassicalLimit(c) => (c, cmd_classical_limit),
    };
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(out) = common.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok((cmd(&cfg)?, common.quiet))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((outcome, quiet)) => {
            if !quiet {
                for line in &outcome.summary {
                    println!("{line}");
                }
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("qrf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
