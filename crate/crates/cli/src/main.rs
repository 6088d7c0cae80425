//! `cfmm-forge`: optimal liquidity, inversion, simulation and checks from the
//! command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod formats;

#[derive(Debug, Parser)]
#[command(
    name = "cfmm-forge",
    version,
    about = "Optimal liquidity for constant function market makers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every command. Flags override `--config` values, which
/// override the built-in defaults.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML file with defaults for any flag, keyed by flag name
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Belief file (TOML, tagged by `kind`)
    #[arg(long, value_name = "PATH")]
    pub belief: Option<PathBuf>,
    /// Reference family: constant-product, weighted:α, lmsr, lognormal:σ,
    /// concentrated:lo,hi
    #[arg(long, value_name = "NAME[:PARAM]")]
    pub family: Option<String>,
    /// Budget B [default: 2]
    #[arg(long)]
    pub budget: Option<f64>,
    /// Initial price of X [default: 1]
    #[arg(long)]
    pub px: Option<f64>,
    /// Initial price of Y [default: 1]
    #[arg(long)]
    pub py: Option<f64>,
    /// Price grid [default: 1e-4,1e4,2001]
    #[arg(long, value_name = "PMIN,PMAX,N")]
    pub grid: Option<String>,
    /// Output CSV; standard output when omitted
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal liquidity for a belief: writes `p,L,Y,X` and a report
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Fee level and trade-size scale
        #[arg(long, value_name = "DELTA,S")]
        fee: Option<String>,
        /// Extra linear term in the objective
        #[arg(long, value_name = "kappa|lvr:C")]
        linear_term: Option<String>,
    },
    /// Belief for which an allocation is optimal: writes `p,h`
    Invert {
        #[command(flatten)]
        common: Common,
        /// Allocation CSV `p,L,Y,X`
        #[arg(long, value_name = "PATH")]
        alloc: Option<PathBuf>,
        /// Also write the belief as a `p_x,p_y,psi` table
        #[arg(long, value_name = "PATH")]
        table_2d: Option<PathBuf>,
        /// Axis of the 2-D table [default: 1e-3,1e3,61]
        #[arg(long, value_name = "PMIN,PMAX,N")]
        axis: Option<String>,
    },
    /// Random-walk trade simulation: failure rate against its bounds
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Allocation CSV to trade against instead of a family or belief
        #[arg(long, value_name = "PATH")]
        alloc: Option<PathBuf>,
        /// Trade size, slippage tolerance, measured steps, optional seed
        /// [default: 0.02,0.21,1000000]
        #[arg(long, value_name = "K,EPS,STEPS[,SEED]")]
        sim: Option<String>,
        /// Seed when --sim has none; falls back to CFMM_FORGE_SEED, then 0
        #[arg(long)]
        seed: Option<u64>,
        /// Per-step arrival probability [default: 0.5]
        #[arg(long)]
        q: Option<f64>,
        /// strict-spot or overall-rate [default: strict-spot]
        #[arg(long)]
        rule: Option<String>,
        /// fixed, uniform or exponential [default: fixed]
        #[arg(long)]
        size: Option<String>,
        /// Exit with code 4 when the failure rate leaves its bounds by more
        /// than three standard errors
        #[arg(long)]
        assert_bounds: bool,
    },
    /// Optimizes a reference family and compares with its known shape
    Verify {
        #[command(flatten)]
        common: Common,
        /// Largest admissible relative deviation [default: 1e-3]
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Samples a belief on a 2-D table: writes `p_x,p_y,psi`
    CompileBelief {
        #[command(flatten)]
        common: Common,
        /// Axis used for both prices [default: 1e-3,1e3,61]
        #[arg(long, value_name = "PMIN,PMAX,N")]
        axis: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize {
            common,
            fee,
            linear_term,
        } => commands::optimize(&common, fee, linear_term),
        Command::Invert {
            common,
            alloc,
            table_2d,
            axis,
        } => commands::invert(&common, alloc, table_2d, axis),
        Command::Simulate {
            common,
            alloc,
            sim,
            seed,
            q,
            rule,
            size,
            assert_bounds,
        } => commands::simulate(
            &common,
            commands::SimFlags {
                alloc,
                sim,
                seed,
                q,
                rule,
                size,
                assert_bounds,
            },
        ),
        Command::Verify { common, tol } => commands::verify(&common, tol),
        Command::CompileBelief { common, axis } => commands::compile_belief(&common, axis),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cfmm-forge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
