//! Command-line surface over the `gumira` library: orbit and sequence
//! export, level analysis, rotation sweeps, period hunts, closure
//! classification, exact invariant search and local reports.
//!
//! Every subcommand is deterministic for identical flags. Outputs embed the
//! producing command line so `gumira replay <file>` can re-run it and check
//! for bit-identical reproduction. CSV uses `,`, `.` and LF; JSON is UTF-8
//! with keys in stable (sorted) order; exact rationals are printed as
//! `p/q` strings. `GUMIRA_THREADS` caps internal parallelism.

mod render;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "gumira", version, about = "Explore a 2-periodically forced planar recurrence pair: an integrable composition with first integral, rotation numbers and period structure, and its conjugate chaotic twin")]
pub struct Cli {
    /// Write the report here instead of stdout
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Iterate a composed map and export the orbit as CSV (n, x, y, V | W)
    Orbit(OrbitArgs),
    /// Critical level values, topology and x-axis projections (JSON)
    Levels(LevelsArgs),
    /// Rotation-number sweep over a level grid, winding and flow (CSV)
    Rotation(RotationArgs),
    /// Closure structure of the scalar sequence from a seed (JSON)
    Classify(ClassifyArgs),
    /// Admissible periods, the 2-periodic locus, optional resonant-level hunt (JSON)
    Periods(PeriodsArgs),
    /// Exact polynomial-invariant search for a positive rational cycle (JSON)
    SearchInvariant(SearchInvariantArgs),
    /// Linearisation, resonances and twist coefficient at the origin (JSON)
    Local(LocalArgs),
    /// Re-run the command embedded in an output file and verify bit-identical output
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
#[value(rename_all = "UPPER")]
pub enum FamilyArg {
    G,
    F,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionArg {
    Forward,
    Backward,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchArg {
    Main,
    Positive,
    Negative,
}

#[derive(Args, Debug, Clone)]
pub struct OrbitArgs {
    /// Recurrence family
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// First cycle parameter (applied first)
    #[arg(short)]
    pub a: f64,
    /// Second cycle parameter
    #[arg(short)]
    pub b: f64,
    /// Start point as `x,y`
    #[arg(long, allow_hyphen_values = true)]
    pub seed: String,
    /// Number of composed-map steps
    #[arg(short, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    pub direction: DirectionArg,
    /// Also write a gnuplot script for the exported orbit (requires -o)
    #[arg(long, requires = "output")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct LevelsArgs {
    #[arg(short)]
    pub a: f64,
    #[arg(short)]
    pub b: f64,
    /// Level values to describe (repeatable)
    #[arg(long = "h", allow_hyphen_values = true)]
    pub levels: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct RotationArgs {
    #[arg(short)]
    pub a: f64,
    #[arg(short)]
    pub b: f64,
    /// Level grid as `LO:HI:lin|log:N`
    #[arg(long, allow_hyphen_values = true)]
    pub h_grid: String,
    #[arg(long, value_enum, default_value_t = BranchArg::Main)]
    pub branch: BranchArg,
    /// Iterates per winding estimate
    #[arg(long, default_value_t = 100_000)]
    pub n_iter: usize,
    /// Also write a gnuplot script for the sweep (requires -o)
    #[arg(long, requires = "output")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ClassifyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(short)]
    pub a: f64,
    #[arg(short)]
    pub b: f64,
    /// Seed terms as `x1,x2`
    #[arg(long, allow_hyphen_values = true)]
    pub seed: String,
    #[arg(long, default_value_t = 100_000)]
    pub n_terms: usize,
    #[arg(long, default_value_t = 50.0)]
    pub gap_factor: f64,
    #[arg(long, default_value_t = 20)]
    pub min_cluster: usize,
    /// Also cluster the odd- and even-indexed subsequences separately
    #[arg(long)]
    pub odd_even: bool,
}

#[derive(Args, Debug, Clone)]
pub struct PeriodsArgs {
    #[arg(short)]
    pub a: f64,
    #[arg(short)]
    pub b: f64,
    #[arg(long, default_value_t = 12)]
    pub q_max: usize,
    /// Hunt a level with this rotation number, as `P/Q`
    #[arg(long, requires = "bracket")]
    pub target: Option<String>,
    /// Bracket for the hunt as `LO:HI`
    #[arg(long, allow_hyphen_values = true)]
    pub bracket: Option<String>,
    #[arg(long, value_enum, default_value_t = BranchArg::Main)]
    pub branch: BranchArg,
}

#[derive(Args, Debug, Clone)]
pub struct SearchInvariantArgs {
    /// Forcing cycle as comma-separated positive rationals, e.g. `1/2,2,3`
    #[arg(long)]
    pub betas: String,
    /// Steps of the numeric conservation spot-check (0 to skip)
    #[arg(long, default_value_t = 10_000)]
    pub verify_steps: usize,
}

#[derive(Args, Debug, Clone)]
pub struct LocalArgs {
    #[arg(short)]
    pub a: f64,
    #[arg(short)]
    pub b: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    /// A file previously produced by this tool
    pub file: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(threads) = std::env::var("GUMIRA_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }

    let rendered = match &cli.command {
        Command::Replay(args) => return render::replay(args, cli.output.as_deref()),
        other => render::render(other),
    };
    match rendered {
        Ok(out) => {
            if let Err(e) = write_out(cli.output.as_deref(), &out.content) {
                eprintln!("error[io]: {e}");
                return ExitCode::from(1);
            }
            if let Err(e) = render::write_plot_script(&cli) {
                eprintln!("error[io]: {e}");
                return ExitCode::from(1);
            }
            if let Some(msg) = out.runtime_error {
                eprintln!("{msg}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(1)
        }
    }
}

fn write_out(path: Option<&std::path::Path>, content: &str) -> std::io::Result<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}
