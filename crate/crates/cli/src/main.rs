use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use imitanet::config::{CommandKind, ExperimentSpec};
use imitanet::{execute, resolve_out};

#[derive(Parser)]
#[command(name = "imitanet", version, about = "Imitation dynamics experiments on networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON experiment spec.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else out/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Strategy dynamics on a fixed network.
    Simulate(Common),
    /// Strategy dynamics with periodic edge revision.
    Coevolve(Common),
    /// Trend adoption runs.
    Trend(Common),
    /// Saturation ensembles and regressions.
    Sweep(Common),
    /// Max-min condition, product decay and energy for one profile.
    Analyze(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Simulate(c) => (CommandKind::Simulate, c),
        Command::Coevolve(c) => (CommandKind::Coevolve, c),
        Command::Trend(c) => (CommandKind::Trend, c),
        Command::Sweep(c) => (CommandKind::Sweep, c),
        Command::Analyze(c) => (CommandKind::Analyze, c),
    };
    let result = ExperimentSpec::load(&common.config).and_then(|mut spec| {
        if common.seed.is_some() {
            spec.seed = common.seed;
        }
        let out = resolve_out(kind, &spec, common.out.as_deref());
        let files = execute(kind, spec, &out)?;
        Ok((out, files))
    });
    match result {
        Ok((out, files)) => {
            println!("wrote {} files to {}", files.len() + 1, out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("imitanet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
