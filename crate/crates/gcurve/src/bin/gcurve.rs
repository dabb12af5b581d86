use clap::{Parser, Subcommand};
use gcurve::config::{parse_config, Mode};
use gcurve::runner::run;
use std::path::PathBuf;
use std::process::ExitCode;

/// Front-propagation laboratory: monotone solvers for the cutoff
/// mean-curvature equation, value functions, and property verification.
#[derive(Parser)]
#[command(name = "gcurve", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the per-check report lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the periodic problem and write snapshots.
    Periodic(CommonArgs),
    /// Evolve the radial problem and write snapshots.
    Radial(CommonArgs),
    /// Dynamic-programming value table for the radial problem.
    Value(CommonArgs),
    /// Large-time profile from stabilized values and travel costs.
    Limit(CommonArgs),
    /// Run the property suite and fail on any violated check.
    Verify(CommonArgs),
    /// Convergence and Lipschitz study.
    Study(CommonArgs),
}

impl Command {
    fn mode(&self) -> Mode {
        match self {
            Command::Periodic(_) => Mode::Periodic,
            Command::Radial(_) => Mode::Radial,
            Command::Value(_) => Mode::Value,
            Command::Limit(_) => Mode::Limit,
            Command::Verify(_) => Mode::Verify,
            Command::Study(_) => Mode::Study,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Periodic(a)
            | Command::Radial(a)
            | Command::Value(a)
            | Command::Limit(a)
            | Command::Verify(a)
            | Command::Study(a) => a,
        }
    }
}

fn main() -> ExitCode {
    gcurve::init_thread_pool_from_env();
    let cli = Cli::parse();
    let mode = cli.command.mode();
    let args = cli.command.args();

    let bytes = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match parse_config(&bytes) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }

    match run(&config, mode, args.quiet) {
        Ok(summary) => {
            if !args.quiet {
                println!(
                    "{}: {} artifact(s) in {}",
                    summary.mode,
                    summary.artifacts.len(),
                    config.output_dir.display()
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
