use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qfocus_cli::output::{render, write_files, Format};
use qfocus_cli::{run, CliError, RunConfig, RunKind};

/// Expansion-parameter focusing under passive quantum fluctuations.
#[derive(Parser)]
#[command(name = "qfocus", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical Raychaudhuri evolution and collapse time.
    Classical(Common),
    /// Mean, variance and Gaussian collapse probability of the smeared field.
    Moments(Common),
    /// Monte Carlo first-passage simulation.
    Mc(Common),
    /// Green-operator residuals, bi-solution checks and refinement order.
    Diagnostics(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the JSON record and CSV trajectory.
    #[arg(long, env = "QFOCUS_OUT_DIR")]
    out: Option<PathBuf>,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Format written to stdout.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn execute(kind: RunKind, args: Common) -> Result<String, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let (Some(seed), Some(mc)) = (args.seed, config.mc.as_mut()) {
        mc.seed = seed;
    }
    let out = run(kind, config)?;
    let text = render(&out, args.format)?;
    if let Some(dir) = &args.out {
        for path in write_files(dir, &out)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Classical(a) => (RunKind::Classical, a),
        Command::Moments(a) => (RunKind::Moments, a),
        Command::Mc(a) => (RunKind::Mc, a),
        Command::Diagnostics(a) => (RunKind::Diagnostics, a),
    };
    match execute(kind, args) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let sep = if text.ends_with('\n') { "" } else { "\n" };
            match write!(stdout, "{text}{sep}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
