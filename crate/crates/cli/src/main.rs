//! `sunif`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 data, feasibility or
//! I/O error, 3 numeric hazard encountered (results are still printed).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "sunif", version, about = "Exact block discrepancies and s-uniform distribution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded fair-coin bit sequence.
    Gen(GenArgs),
    /// Print the exact block discrepancy D_k(t,n) as `numerator denominator`.
    Disc(DiscArgs),
    /// Evaluate D_{s(n)}(t,n) along a checkpoint list and write CSV.
    Profile(ProfileArgs),
    /// Print phi_s(n) = floor(log2 n - log2 log2 n - s(n)) with hazard flags.
    Phi(PhiArgs),
    /// Report phi_s >= 0 and the tail-minimum divergence surrogate as JSON.
    Admissible(AdmissibleArgs),
    /// Run a Monte Carlo experiment described by a JSON spec file.
    Exp(ExpArgs),
    /// Run two single-schedule experiments and report median trends.
    Compare(CompareArgs),
    /// Exact law of D(t,n) under fair coin flips, as CSV.
    Dist(DistArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutFormat {
    Text,
    Packed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InFormat {
    /// Text if the input only contains '0', '1' and line breaks, else packed.
    Auto,
    Text,
    Packed,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long)]
    pub length: u64,
    /// Output path, `-` for standard output.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    pub format: OutFormat,
}

#[derive(Args, Debug)]
pub struct DiscArgs {
    /// Input path, `-` for standard input.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InFormat::Auto)]
    pub format: InFormat,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = sunif_core::DEFAULT_K_MAX)]
    pub k_max: u32,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InFormat::Auto)]
    pub format: InFormat,
    /// Schedule: const:<v>, form:<a>,<b>,<c>, table:<path>, phi-of:<spec>, clamp:<min>:<spec>.
    #[arg(long)]
    pub s_spec: String,
    /// Comma-separated ascending checkpoints.
    #[arg(long, value_delimiter = ',', conflicts_with = "geometric", required_unless_present = "geometric")]
    pub checkpoints: Vec<u64>,
    /// Geometric checkpoints `2^j` for `j` in `FROM:TO`.
    #[arg(long)]
    pub geometric: Option<String>,
    #[arg(long, default_value_t = sunif_core::DEFAULT_K_MAX)]
    pub k_max: u32,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PhiArgs {
    #[arg(long)]
    pub s_spec: String,
    #[arg(long, conflicts_with = "range", required_unless_present = "range")]
    pub n: Option<u64>,
    /// Inclusive range `A:B` (or `A..B`).
    #[arg(long)]
    pub range: Option<String>,
}

#[derive(Args, Debug)]
pub struct AdmissibleArgs {
    #[arg(long)]
    pub s_spec: String,
    #[arg(long)]
    pub horizon: u64,
}

#[derive(Args, Debug)]
pub struct ExpArgs {
    #[arg(long)]
    pub spec_file: PathBuf,
    /// Worker threads; the result does not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON result document, `-` for standard output.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// Also write the experiment CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long)]
    pub n: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Disc(a) => commands::disc(a),
        Command::Profile(a) => commands::profile(a),
        Command::Phi(a) => commands::phi(a),
        Command::Admissible(a) => commands::admissible(a),
        Command::Exp(a) => commands::exp(a),
        Command::Compare(a) => commands::compare(a),
        Command::Dist(a) => commands::dist(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sunif: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
