mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "bdlab",
    version,
    about = "Benincasa-Dowker action of causal sets: exact, sampled and Grover-counting estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a causal set and write it in the text format.
    Gen(GenArgs),
    /// Parse and validate a causal-set file.
    Validate(ValidateArgs),
    /// Compute or estimate the action.
    Action(ActionArgs),
    /// Check the oracle circuit against its predicate on every basis pair of an instance.
    OracleVerify(OracleVerifyArgs),
    /// Width, gate and depth accounting for a circuit.
    Resources(ResourcesArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Pairs,
    Matrix,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Mode {
    Strict,
    Close,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionBackend {
    Naive,
    Matrix,
    Strassen,
    Sample,
    Quantum,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum CircuitKind {
    Oracle,
    Dataprep,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ModelArg {
    Expanded,
    Analytic,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum OracleModeArg {
    Predicate,
    Circuit,
}

/// Where the causal set comes from: a file or a generator.
#[derive(Args, Debug)]
pub struct InputArgs {
    /// Causal-set file (`n=<int>` header, then pairs or a `matrix:` block).
    #[arg(long, conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    /// Generator model: chain, antichain, random:<p> or layered:<w>.
    #[arg(long)]
    pub gen: Option<String>,
    /// Element count for --gen.
    #[arg(long)]
    pub n: Option<usize>,
    /// How a non-transitive input relation is treated.
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: Mode,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// chain, antichain, random:<p> or layered:<w>.
    #[arg(long, default_value = "random:0.3")]
    pub model: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "pairs")]
    pub style: Style,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ActionArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "naive")]
    pub backend: ActionBackend,
    /// Highest abundance index reported by the exact backends; defaults to n_d - 1.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Coefficient file (`d=`, `alpha=`, `beta=`, `C=`, `length_ratio=`); four-dimensional preset when absent.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// l / l_p; overrides the coefficient file.
    #[arg(long)]
    pub length_ratio: Option<f64>,
    /// Sample size for the sample backend; defaults to ceil(N / 4).
    #[arg(long = "K")]
    pub sample_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "predicate")]
    pub oracle_mode: OracleModeArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct OracleVerifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: u64,
    /// Instance file; a seeded random instance of size n when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ResourcesArgs {
    #[arg(long, value_enum)]
    pub circuit: CircuitKind,
    #[arg(long)]
    pub n: usize,
    /// Layer index of the oracle.
    #[arg(long, default_value_t = 0)]
    pub k: u64,
    #[arg(long, value_enum, default_value = "expanded")]
    pub model: ModelArg,
    /// Instance for the data-preparation circuit: file path.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Instance for the data-preparation circuit: generator model.
    #[arg(long, default_value = "random:0.3")]
    pub gen: String,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub c_mcx: u64,
    #[arg(long, default_value_t = 1)]
    pub c_fanout: u64,
    #[arg(long, default_value_t = 1)]
    pub c_prep: u64,
    /// Also write the gate listing to this file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("BDLAB_THREADS") {
        let threads: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Failure::parameter(format!("BDLAB_THREADS=`{v}` is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::parameter(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_PARAMETER } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Validate(a) => commands::validate(&a),
        Command::Action(a) => commands::action(&a),
        Command::OracleVerify(a) => commands::oracle_verify(&a),
        Command::Resources(a) => commands::resources(&a),
    });
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
