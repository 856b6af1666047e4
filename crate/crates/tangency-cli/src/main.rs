//! Command-line laboratory for Cantor-type scaffolds, tangent graph
//! constructions, and the estimators that probe them.

mod commands;
mod config;
mod error;
mod io;
mod spec;

use clap::{Parser, Subcommand};

use crate::commands::*;

#[derive(Parser)]
#[command(
    name = "tangency",
    version,
    about = "Cantor scaffolds, prescribed-gradient graphs, and their numerical probes",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a scaffold and print its closed-form measure table.
    Build(BuildArgs),
    /// Evaluate a constructed graph on a CSV of points.
    Eval(EvalArgs),
    /// Per-level residual table of a constructed graph.
    Residuals(ResidualArgs),
    /// Tangency pass-rate report at deep cube centers.
    Verify(VerifyArgs),
    /// Fractional seminorm estimates.
    Seminorm(SeminormArgs),
    /// Box-counting dimension fit from exact cube counts.
    Dimension(DimensionArgs),
    /// Complement-density profile around a deep point.
    Superdensity(SuperdensityArgs),
    /// Circulation, flux and residual of a one-form on a rectangle.
    Stokes(StokesArgs),
    /// Boundary-escape scan against a product set.
    Escape(EscapeArgs),
    /// Circulation-versus-curl locality diagnostic records.
    Witness(WitnessArgs),
    /// Classify (s, alpha, q) or emit the full phase grid.
    Phase(PhaseArgs),
    /// Run the fast invariant bundle (exit 4 on violation).
    Check(CheckArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(args) => args.run(),
        Command::Eval(args) => args.run(),
        Command::Residuals(args) => args.run(),
        Command::Verify(args) => args.run(),
        Command::Seminorm(args) => args.run(),
        Command::Dimension(args) => args.run(),
        Command::Superdensity(args) => args.run(),
        Command::Stokes(args) => args.run(),
        Command::Escape(args) => args.run(),
        Command::Witness(args) => args.run(),
        Command::Phase(args) => args.run(),
        Command::Check(args) => args.run(),
    };
    if let Err(err) = result {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
