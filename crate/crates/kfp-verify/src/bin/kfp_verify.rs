//! Thin command-line front end.
//!
//! All substance lives in the library ([`kfp_verify::report::run`]); this
//! binary only parses flags into a [`RunConfig`] and maps the outcome to
//! exit codes: 0 when the run's asserted checks pass, 1 for usage or
//! input errors (bad flags, malformed potential files, exceeded budgets),
//! 2 when the run executed but an asserted numerical check failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kfp_verify::report::{run, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "kfp-verify",
    version,
    about = "Numerical checks for kinetic Fokker-Planck operators with polynomial potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the potential and every derived quantity at one point
    Analyze(Flags),
    /// Map the complement of the coercive region for a given kappa
    SigmaScan(Flags),
    /// Test the asymptotic growth conditions empirically
    CheckAssumption(Flags),
    /// Build the scale-adapted quadratic partition over a box
    Partition(Flags),
    /// Measure the localization-identity defect on a discrete model
    ImsCheck(Flags),
    /// Measure the empirical subellipticity constant
    Subelliptic(Flags),
    /// Follow the quasimode quotient sequence and fit its decay
    Weyl(Flags),
    /// Compute the low spectrum of the associated Witten Laplacian
    WittenSpectrum(Flags),
}

#[derive(Args)]
struct Flags {
    /// Potential file: {"d": 2, "terms": [{"alpha": [2,2], "c": -1.0}]}
    #[arg(long)]
    potential: Option<PathBuf>,
    /// Evaluation point, comma separated (analyze; defaults to all ones)
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    point: Option<Vec<f64>>,
    /// Coercivity threshold kappa
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Trace-domination constant c1
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    /// Half-width of the sampling / localization box
    #[arg(long = "box", default_value_t = 20.0)]
    box_radius: f64,
    /// Position points per axis (also the membership-grid resolution)
    #[arg(long, default_value_t = 64)]
    nq: usize,
    /// Momentum modes per axis
    #[arg(long, default_value_t = 8)]
    np: usize,
    /// Seed for randomized test families; 0 keeps the library default
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random vectors per randomized family
    #[arg(long, default_value_t = 4)]
    trials: usize,
    /// Eigenvalues requested from witten-spectrum
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Family parameter for weyl
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    epsilon: f64,
    /// Scale sequence for weyl, comma separated
    #[arg(long = "n-list", value_delimiter = ',', default_values_t = [4u32, 8, 16, 32])]
    n_list: Vec<u32>,
    /// Output directory for artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Cli {
    fn into_config(self) -> RunConfig {
        let (command, f) = match self.command {
            Cmd::Analyze(f) => (Command::Analyze, f),
            Cmd::SigmaScan(f) => (Command::SigmaScan, f),
            Cmd::CheckAssumption(f) => (Command::CheckAssumption, f),
            Cmd::Partition(f) => (Command::Partition, f),
            Cmd::ImsCheck(f) => (Command::ImsCheck, f),
            Cmd::Subelliptic(f) => (Command::Subelliptic, f),
            Cmd::Weyl(f) => (Command::Weyl, f),
            Cmd::WittenSpectrum(f) => (Command::WittenSpectrum, f),
        };
        RunConfig {
            command,
            potential: f.potential,
            point: f.point,
            kappa: f.kappa,
            c1: f.c1,
            box_radius: f.box_radius,
            nq: f.nq,
            np: f.np,
            seed: f.seed,
            trials: f.trials,
            levels: f.levels,
            epsilon: f.epsilon,
            n_list: f.n_list,
            out: f.out,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too; they are not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.into_config()) {
        Ok(outcome) => {
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            if outcome.passed {
                println!("ok");
                ExitCode::SUCCESS
            } else {
                println!("check failed: see the artifacts above for details");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
