use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use star_lebesgue::cli::{self, Outcome, RunConfig, EXIT_INVALID};

/// Lebesgue decomposition of positive functionals on finite-dimensional *-algebras.
#[derive(Parser)]
#[command(name = "star-lebesgue", version)]
struct Args {
    /// Numerical tolerance, in (0, 1e-2).
    #[arg(long, global = true, env = "STAR_LEBESGUE_TOL", default_value_t = star_lebesgue::DEFAULT_TOL)]
    tolerance: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Report file (directory for `generate`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split g into parts absolutely continuous and singular with respect to f.
    Decompose { algebra: PathBuf, f: PathBuf, g: PathBuf },
    /// Decompose and run every structural check; exit 1 if any fails.
    Verify {
        algebra: PathBuf,
        f: PathBuf,
        g: PathBuf,
        /// Replace the computed g_a by this functional before checking.
        #[arg(long = "override", value_name = "FILE")]
        override_g_a: Option<PathBuf>,
    },
    /// Write a random algebra and representable functional.
    Generate {
        /// One of: function, matrix, cyclic, symmetric.
        builder: String,
        param: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Confine the functional to the left ideal of this basis element.
        #[arg(long)]
        support: Option<usize>,
    },
    /// Print the GNS triple of a functional.
    Gns { algebra: PathBuf, f: PathBuf },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match RunConfig::new(args.tolerance, args.seed, args.out.clone(), args.pretty) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    let (outcome, report_config): (Outcome, RunConfig) = match &args.command {
        Command::Decompose { algebra, f, g } => (cli::cmd_decompose(algebra, f, g, &config), config.clone()),
        Command::Verify { algebra, f, g, override_g_a } => {
            (cli::cmd_verify(algebra, f, g, override_g_a.as_deref(), &config), config.clone())
        }
        Command::Generate { builder, param, k, support } => (
            cli::cmd_generate(builder, *param, *k, *support, &config),
            RunConfig { output_path: None, ..config.clone() },
        ),
        Command::Gns { algebra, f } => (cli::cmd_gns(algebra, f, &config), config.clone()),
    };
    if let Some(message) = outcome.report.pointer("/error/message").and_then(|m| m.as_str()) {
        eprintln!("error: {message}");
    }
    if let Err(e) = outcome.emit(&report_config) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_INVALID as u8);
    }
    ExitCode::from(outcome.code as u8)
}
