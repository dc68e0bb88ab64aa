use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rieszlab::harness::{self, Config, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Conditions,
    Pointwise,
    Bound,
    Representation,
    Embedding,
    Mushroom,
    Sharpness,
    Potential,
    Maximal,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Conditions => Subcommand::Conditions,
            Command::Pointwise => Subcommand::Pointwise,
            Command::Bound => Subcommand::Bound,
            Command::Representation => Subcommand::Representation,
            Command::Embedding => Subcommand::Embedding,
            Command::Mushroom => Subcommand::Mushroom,
            Command::Sharpness => Subcommand::Sharpness,
            Command::Potential => Subcommand::Potential,
            Command::Maximal => Subcommand::Maximal,
        }
    }
}

/// Run one experiment and write report.json plus CSV series.
///
/// Exit status: 0 when the verdict matches `expect.verdict` (or none is
/// set), 1 on a mismatch, 2 on invalid input.
#[derive(Debug, Parser)]
#[command(name = "rieszlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let start = Instant::now();
    let cfg = match Config::from_path(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("rieszlab: {e}");
            return ExitCode::from(2);
        }
    };
    let sub = Subcommand::from(cli.command);
    let report = match harness::run(sub, &cfg).and_then(|r| r.write(&cli.out).map(|_| r)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("rieszlab {sub}: {e}");
            return ExitCode::from(2);
        }
    };
    eprintln!(
        "{}: {} in {:.2}s -> {}",
        report.experiment,
        report.verdict.as_str(),
        start.elapsed().as_secs_f64(),
        cli.out.display()
    );
    if report.matches_expectation() {
        ExitCode::SUCCESS
    } else {
        eprintln!("expected {}", report.expected.map_or("-", |v| v.as_str()));
        ExitCode::from(1)
    }
}
