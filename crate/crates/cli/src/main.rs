use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metaring_cli::error::format_violations;
use metaring_cli::{config, run, CliError, Command};

#[derive(Parser)]
#[command(name = "metaring", version, about = "Meta-ring converter simulations and fits")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for sweep evaluation (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lumped-ring mode table and mean FSR.
    Modes(RunArgs),
    /// Two-segment dispersion, FSR curve, mismatch and IDC enhancement.
    Dispersion(RunArgs),
    /// Field tuning and mixing coefficients.
    Tune(RunArgs),
    /// Conversion efficiency versus pump, detuning and mode pair.
    Convert(RunArgs),
    /// Interference between converted and reflected tones.
    Fringe(RunArgs),
    /// Kerr bifurcation and TLS saturation.
    Saturate(RunArgs),
    /// Reflection, field-shift and mode-ladder fits.
    Fit(RunArgs),
    /// Every command the config has sections for.
    Sweep(RunArgs),
    /// Check a config and list broken invariants.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Validate { config: path } => {
            return match config::validate(&path) {
                Ok(v) if v.is_empty() => {
                    println!("{}: ok", path.display());
                    ExitCode::SUCCESS
                }
                Ok(v) => {
                    eprintln!("{}", format_violations(&v));
                    ExitCode::from(2)
                }
                Err(e) => fail(e),
            };
        }
        Cmd::Modes(a) => (Command::Modes, a),
        Cmd::Dispersion(a) => (Command::Dispersion, a),
        Cmd::Tune(a) => (Command::Tune, a),
        Cmd::Convert(a) => (Command::Convert, a),
        Cmd::Fringe(a) => (Command::Fringe, a),
        Cmd::Saturate(a) => (Command::Saturate, a),
        Cmd::Fit(a) => (Command::Fit, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    match run(command, &args.config, &args.out, args.threads) {
        Ok(manifest) => {
            for path in &manifest.output_paths {
                println!("{}", args.out.join(path).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("metaring: {e}");
    ExitCode::from(e.exit_code() as u8)
}
