mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "taglab",
    version,
    about = "Tag-system laboratory: runs, periods, Collatz reduction and experiments"
)]
struct Cli {
    /// Directory receiving artifacts and the echoed config.json.
    #[arg(long, global = true, env = "TAGLAB_OUT", default_value = "taglab-out")]
    out: PathBuf,

    /// Omit the timestamp field from config.json.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Run a word to an outcome.
    Run(RunArgs),
    /// Search the trajectory of a word for a target word.
    Reach(ReachArgs),
    /// Detect the orbit reached from a word and classify its period type.
    ClassifyPeriod(WordArgs),
    /// Check the Collatz tag system against the shortcut map for 1..=max-n.
    CollatzVerify(CollatzArgs),
    /// Sample random systems of a class and screen them.
    Generate(GenerateArgs),
    /// Screen one system through the candidate pipeline.
    Screen(ScreenArgs),
    /// Outcome census of random initial words, with survival curve.
    Exp1(Exp1Args),
    /// Period-type census of the periodic records of a census.
    Exp2(Exp2Args),
    /// Sensitivity of the outcome to single-symbol substitutions.
    Exp3(WordArgs),
    /// Randomness battery on the produced symbol stream.
    Exp4(Exp4Args),
    /// Order-k entropy rate of the produced symbol stream.
    Exp5(Exp5Args),
    /// Long checkpointed run of Post's system from (100)^110.
    Soak(SoakArgs),
    /// Measure stepping throughput.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct SystemArgs {
    /// Built-in system: post-00-1101, fig1-right or collatz-ts32.
    #[arg(long, default_value = "post-00-1101", conflicts_with = "system")]
    preset: String,
    /// Tag-system file in the `v=<n>` / `<i> -> <word>` text format.
    #[arg(long)]
    system: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct BudgetArgs {
    #[arg(long, default_value = "1e7", value_parser = parse_count)]
    max_steps: u64,
    #[arg(long, default_value = "15000", value_parser = parse_count)]
    max_length: u64,
}

/// Either an explicit word or a seeded random one.
#[derive(Args, Debug, Clone, Serialize)]
struct InitialArgs {
    /// Initial word; digits, or comma-separated indices for large alphabets.
    #[arg(long)]
    word: Option<String>,
    /// Length of the random initial word used when --word is absent.
    #[arg(long, default_value = "300")]
    length: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RunArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    initial: InitialArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Skip cycle detection (periodic runs then end BudgetExhausted).
    #[arg(long)]
    no_detect: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ReachArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    word: String,
    #[arg(long)]
    target: String,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct WordArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    initial: InitialArgs,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CollatzArgs {
    #[arg(long, value_parser = parse_count)]
    max_n: u64,
    #[arg(long, default_value = "1e12", value_parser = parse_count)]
    max_steps: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum BalanceArg {
    Eq0,
    Le0,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum SurviveArg {
    All,
    Any,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScreenOptions {
    #[arg(long, value_enum, default_value = "eq0")]
    balance: BalanceArg,
    #[arg(long, value_enum, default_value = "all")]
    survive: SurviveArg,
    #[arg(long, default_value = "20")]
    pilot_words: usize,
    #[arg(long, default_value = "300")]
    pilot_length: usize,
    #[arg(long, default_value = "1e7", value_parser = parse_count)]
    pilot_max_steps: u64,
    #[arg(long, default_value = "15000", value_parser = parse_count)]
    pilot_max_length: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GenerateArgs {
    #[arg(long, default_value = "2")]
    mu: usize,
    /// Deletion-number range `min:max`, or a single value.
    #[arg(long, default_value = "3:15", value_parser = parse_range)]
    v: (usize, usize),
    #[arg(long, default_value = "4")]
    excess_max: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long, default_value = "100", value_parser = parse_count)]
    count: u64,
    #[command(flatten)]
    screen: ScreenOptions,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScreenArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[command(flatten)]
    screen: ScreenOptions,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Exp1Args {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value = "1998", value_parser = parse_count)]
    words: u64,
    #[arg(long, default_value = "300")]
    length: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Exp2Args {
    /// Census produced by exp1; runs a fresh census when absent.
    #[arg(long)]
    census: Option<PathBuf>,
    /// Extra initial words to classify alongside the census.
    #[arg(long = "extra-word")]
    extra_words: Vec<String>,
    #[command(flatten)]
    exp1: Exp1Args,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Scanned,
    WholeWord,
}

#[derive(Args, Debug, Clone, Serialize)]
struct StreamArgs {
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    stream_length: u64,
    #[arg(long, value_enum, default_value = "scanned")]
    mode: ModeArg,
    /// Also write the raw stream, one ASCII symbol per byte.
    #[arg(long)]
    export_stream: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Exp4Args {
    #[command(flatten)]
    word: WordArgs,
    #[command(flatten)]
    stream: StreamArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Exp5Args {
    #[command(flatten)]
    word: WordArgs,
    #[command(flatten)]
    stream: StreamArgs,
    #[arg(long, default_value = "1")]
    order: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SoakArgs {
    /// Checkpoint file; defaults to soak-checkpoint.json in the output directory.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Step index at which to stop.
    #[arg(long, default_value = "1e10", value_parser = parse_count)]
    steps: u64,
    #[arg(long, default_value = "1e9", value_parser = parse_count)]
    every: u64,
    /// Continue from the checkpoint if it exists.
    #[arg(long)]
    resume: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Initial word; defaults to (100)^110.
    #[arg(long)]
    word: Option<String>,
    #[arg(long, default_value = "1e8", value_parser = parse_count)]
    steps: u64,
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    max_length: u64,
}

/// Non-negative integer, also accepting exact scientific notation (`1e7`).
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{t}` is not an integer"))
    };
    match s.split_once(':') {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => parse(s).map(|v| (v, v)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.to_json());
            ExitCode::from(failure.exit_code())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::config("io", e.to_string())
    }
}
