mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use commands::*;

/// Numerical checks of plurisubharmonicity, L² estimates and extension
/// inequalities in C^n.
#[derive(Parser)]
#[command(name = "pshlab", version)]
struct Cli {
    /// TOML file of options for the subcommand; flags given on the command
    /// line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Levi matrix, closed form against finite differences, and its lowest eigenvalue.
    Levi(LeviArgs),
    /// Randomized sub-mean-value scan over holomorphic cylinders.
    CheckPsh(CheckPshArgs),
    /// Residual of the weighted Bochner identity for a test form.
    Bochner(BochnerArgs),
    /// Search for a certificate against the sharp L² estimate.
    Witness(WitnessArgs),
    /// Coarse-estimate bound sweep and growth of the derived constants.
    CoarseChain(CoarseChainArgs),
    /// Extension inequality on a cylinder and the best polynomial constant.
    Extend(ExtendArgs),
    /// Coarse extension bounds along a sequence of powers m.
    CoarseExtend(CoarseExtendArgs),
    /// Minimal-norm solution of the ∂̄-equation in one variable.
    Dbar(DbarArgs),
    /// Runs the acceptance suite.
    Accept(AcceptArgs),
}

fn set_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("PSHLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("PSHLAB_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            anyhow::bail!("PSHLAB_THREADS must be a positive integer, got '{v}'");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run() -> anyhow::Result<bool> {
    let root = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let (args, config_file) = config::expand(std::env::args().collect(), &root)?;
    let matches = match root.try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            if !e.use_stderr() {
                e.print()?;
                return Ok(true);
            }
            return Err(e.into());
        }
    };
    let cli = Cli::from_arg_matches(&matches)?;
    set_threads()?;
    let outcome = match cli.cmd {
        Cmd::Levi(a) => levi(a),
        Cmd::CheckPsh(a) => check_psh(a),
        Cmd::Bochner(a) => bochner(a),
        Cmd::Witness(a) => witness(a),
        Cmd::CoarseChain(a) => coarse_chain(a),
        Cmd::Extend(a) => extend(a),
        Cmd::CoarseExtend(a) => coarse_extend(a),
        Cmd::Dbar(a) => dbar(a),
        Cmd::Accept(a) => accept(a),
    }?;
    outcome.finish(config_file)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
