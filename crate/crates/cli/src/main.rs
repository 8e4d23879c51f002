//! `crnstab`: structure, realization, classification and simulation of
//! delayed mass-action networks from `.crn` files.
//!
//! Exit codes: 0 success, 1 rejected / not conjugate, 2 parse or usage
//! error, 3 analysis failure / species mismatch / internal error,
//! 4 positivity lost during simulation, 5 dissipation or conservation check
//! failed (`verify`).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "crnstab", version, about = "Delayed mass-action reaction network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Complexes, linkage classes, deficiency, weak reversibility, S-perp basis
    /// and the complex balanced equilibrium.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Builds a linear-conjugate realization of a delayed complex balanced
    /// network under `x = Q x~` and certifies it.
    Realize {
        file: PathBuf,
        /// Diagonal of Q, e.g. `2,1`.
        #[arg(long = "Q", value_name = "Q")]
        q: String,
        /// Write the realization here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tests whether a network is a shrunk-vector variant of a complex
    /// balanced reference.
    Classify {
        file: PathBuf,
        #[arg(long)]
        against: PathBuf,
        /// Accept b_i > 1 (the stability result then does not apply).
        #[arg(long = "allow-b-greater-1")]
        allow_b_greater_one: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Integrates the delay equations and writes a CSV time series.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// JSON list of scenarios to run concurrently, each with `output` and
        /// optional `tau`, `history`, `t_end`, `step`, `sample_every`.
        #[arg(long)]
        batch: Option<PathBuf>,
    },
    /// Simulates and checks that the Lyapunov functional does not increase
    /// and the conserved functionals stay constant.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Reference state of the Lyapunov functional, `ref=1,1`. Defaults to
        /// the complex balanced equilibrium.
        #[arg(long, value_name = "ref=X")]
        lyapunov: Option<String>,
        /// Conserved-functional vector `a`; repeatable. Defaults to an
        /// orthonormal basis of S-perp (or of the invariant-set directions
        /// with `--q`).
        #[arg(long, value_name = "A")]
        conserved: Vec<String>,
        /// Treat FILE as a delayed complex balanced network and verify its
        /// realization under this diagonal map.
        #[arg(long, value_name = "Q")]
        q: Option<String>,
    },
    /// Checks linear conjugacy of two networks, under a given Q or by
    /// searching for one.
    Conjugate {
        first: PathBuf,
        second: PathBuf,
        #[arg(long = "Q", value_name = "Q")]
        q: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    /// Replacement delays, one per reaction in file order, e.g. `0.1,1`.
    #[arg(long)]
    tau: Option<String>,
    /// `const:5,1` or `expr:sin(s)+1,cos(s)+1`.
    #[arg(long)]
    history: Option<String>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long, default_value_t = crnstab::simulate::DEFAULT_STEP)]
    step: f64,
    #[arg(long = "sample-every", default_value_t = 0.1)]
    sample_every: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
