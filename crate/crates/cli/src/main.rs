use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dualhelm::config::Command;
use dualhelm::{run, Invocation};

/// Dual ground states of the nonlinear fractional Helmholtz equation.
#[derive(Parser)]
#[command(name = "dualhelm", version)]
struct Cli {
    command: Command,
    /// Flat `section.key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// Run even when the exponents fall outside the admissible ranges.
    #[arg(long)]
    force: bool,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(&Invocation {
        command: cli.command,
        config: cli.config,
        force: cli.force,
        out: cli.out,
    });
    ExitCode::from(code as u8)
}
