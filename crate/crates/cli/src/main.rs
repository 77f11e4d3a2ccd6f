//! `a2g`: generate cities, run LoS campaigns, fit and sample the channel
//! model, re-extract parameters and validate datasets against models.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use a2g_core::lsfmod::LosMode;
use a2g_core::{EnvironmentClass, LayoutKey, LayoutKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, EXIT_INVALID};

#[derive(Parser, Debug)]
#[command(name = "a2g", version, about = "Air-to-ground channel modeling pipeline")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one city layout.
    Gen(GenArgs),
    /// Run a LoS campaign and write per-link records.
    Campaign(CampaignArgs),
    /// Fit the sigmoid LoS probability to a link dataset.
    FitPlos(FitPlosArgs),
    /// Sample path loss for every link of a dataset.
    Synth(SynthArgs),
    /// Re-derive LSF parameters from a dataset with path loss.
    Extract(ExtractArgs),
    /// Compare a dataset against a channel model.
    Validate(ValidateArgs),
    /// Dump the builtin coefficient tables.
    Tables(TablesArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Campaign config; its first layout and environment, area, seed and
    /// highways are used unless overridden below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub layout: Option<LayoutKind>,
    #[arg(long, required_unless_present = "config")]
    pub env: Option<EnvironmentClass>,
    /// Side of the square area, m (default 1000).
    #[arg(long)]
    pub area: Option<f64>,
    /// Master seed (falls back to A2G_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of full-length HEU corridors (default 2).
    #[arg(long)]
    pub highways: Option<usize>,
    #[arg(long, default_value_t = 40.0)]
    pub highway_width: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CampaignArgs {
    /// JSON campaign config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub layout: Vec<LayoutKind>,
    #[arg(long, value_delimiter = ',')]
    pub env: Vec<EnvironmentClass>,
    #[arg(long)]
    pub area: Option<f64>,
    /// GU grid pitch, m.
    #[arg(long)]
    pub pitch: Option<f64>,
    #[arg(long)]
    pub gu_height: Option<f64>,
    /// Explicit ABS heights, m.
    #[arg(long, value_delimiter = ',', conflicts_with = "height_count")]
    pub heights: Vec<f64>,
    /// Number of log-spaced heights between --min-height and --max-height.
    #[arg(long)]
    pub height_count: Option<usize>,
    #[arg(long, default_value_t = 5.0)]
    pub min_height: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub max_height: f64,
    #[arg(long)]
    pub cities: Option<usize>,
    /// Also sample path loss from this builtin table block.
    #[arg(long)]
    pub channel: Option<LayoutKey>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; several environments get `_<env>` suffixes.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitPlosArgs {
    pub links: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub bin_deg: f64,
    /// Minimum links for a bin to enter the fit.
    #[arg(long, default_value_t = 50)]
    pub min_count: u64,
    /// Label recorded in the output.
    #[arg(long)]
    pub layout: Option<LayoutKey>,
    /// Label recorded in the output.
    #[arg(long)]
    pub env: Option<EnvironmentClass>,
    /// Also write the empirical curve as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Channel or LSF parameters JSON (e.g. `extract` output).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Sigmoid parameters JSON (e.g. `fit-plos` output).
    #[arg(long)]
    pub sigmoid: Option<PathBuf>,
    /// Builtin table block.
    #[arg(long)]
    pub layout: Option<LayoutKey>,
    #[arg(long)]
    pub env: Option<EnvironmentClass>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub links: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "data")]
    pub los_mode: LosMode,
    /// Constant NLoS obstacle offset, dB.
    #[arg(long)]
    pub offset_db: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    pub links: PathBuf,
    #[arg(long)]
    pub env: Option<EnvironmentClass>,
    /// NLoS PLE regime split, m (suburban defaults to 100).
    #[arg(long)]
    pub breakpoint: Option<f64>,
    #[arg(long, conflicts_with = "breakpoint")]
    pub no_breakpoint: bool,
    #[arg(long, default_value_t = a2g_core::extract::MIN_LINKS)]
    pub min_links: usize,
    #[arg(long, default_value_t = a2g_core::extract::MIN_DISTANCE_M)]
    pub min_distance: f64,
    /// Also write per-height estimates as CSV.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub links: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "data")]
    pub los_mode: LosMode,
    #[arg(long, default_value_t = a2g_core::validate::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, value_delimiter = ',', default_values_t = a2g_core::validate::DEFAULT_REPORT_HEIGHTS)]
    pub heights: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report JSON; per-height CDF CSVs are written next to it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TablesArgs {
    #[arg(long)]
    pub layout: Option<LayoutKey>,
    #[arg(long)]
    pub env: Option<EnvironmentClass>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let command = cli.command;
    let dispatch = move || match &command {
        Command::Gen(a) => commands::gen(a),
        Command::Campaign(a) => commands::campaign(a),
        Command::FitPlos(a) => commands::fit_plos(a),
        Command::Synth(a) => commands::synth(a),
        Command::Extract(a) => commands::extract(a),
        Command::Validate(a) => commands::validate(a),
        Command::Tables(a) => commands::tables(a),
    };
    match cli.threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::usage(e.to_string()))?
            .install(dispatch),
        None => dispatch(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            // Everything above the usage hint, folded onto one line.
            let line: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let line = line.join(" ");
            eprintln!("a2g: {}", CliError::usage(line.trim_start_matches("error: ")));
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("a2g: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
