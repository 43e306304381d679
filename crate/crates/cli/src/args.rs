use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use citescale::altmodels::Family;
use citescale::gof::DEFAULT_SIMS;
use citescale::ingest::YearRange;
use citescale::powerlaw::{DEFAULT_BOOTSTRAP_REPS, DEFAULT_MIN_TAIL};
use citescale::scaling::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "citescale",
    version,
    about = "Power-law fitting and scaling analysis for citation data"
)]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a tab-delimited export into subfield aggregates and counts files.
    Ingest(IngestArgs),
    /// Fit a discrete power law to a counts file.
    Fit(FitArgs),
    /// Goodness-of-fit test for an existing fit document.
    Gof(GofArgs),
    /// Compare an existing fit against alternative distributions.
    Compare(CompareArgs),
    /// Log-log regression of citations on paper counts across subfields.
    Scaling(ScalingArgs),
    /// Write a counts file drawn from a chosen distribution.
    Simulate(SimulateArgs),
    /// Render the documents in a directory as tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Tab-delimited record export.
    #[arg(long)]
    pub export: PathBuf,
    /// Classification CSV with columns journal,field,subfield.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep only these publication years, e.g. 2005-2007.
    #[arg(long)]
    pub years: Option<YearRange>,
    #[arg(long, default_value = "AU")]
    pub col_authors: String,
    #[arg(long, default_value = "TI")]
    pub col_title: String,
    #[arg(long, default_value = "SO")]
    pub col_journal: String,
    #[arg(long, default_value = "DT")]
    pub col_doc_type: String,
    #[arg(long, default_value = "TC")]
    pub col_times_cited: String,
    #[arg(long, default_value = "PY")]
    pub col_year: String,
    #[arg(long, default_value = "UT")]
    pub col_id: String,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct SimsArgs {
    /// Number of synthetic datasets.
    #[arg(long, conflicts_with = "epsilon")]
    pub sims: Option<usize>,
    /// Target p-value accuracy; sets the number of synthetic datasets.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

impl SimsArgs {
    pub fn resolve(&self) -> citescale::Result<usize> {
        match (self.sims, self.epsilon) {
            (Some(n), _) => Ok(n),
            (None, Some(eps)) => citescale::gof::required_sims(eps),
            (None, None) => Ok(DEFAULT_SIMS),
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Counts file, one citation count per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Bootstrap replicates for the parameter uncertainties.
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_REPS)]
    pub bootstrap: usize,
    /// Smallest tail the x_min scan may select.
    #[arg(long, default_value_t = DEFAULT_MIN_TAIL)]
    pub min_tail: usize,
    /// Use this x_min instead of scanning.
    #[arg(long)]
    pub xmin: Option<u64>,
    /// Also run the goodness-of-fit test.
    #[arg(long)]
    pub gof: bool,
    #[command(flatten)]
    pub sims: SimsArgs,
    /// Also compare against the alternative distributions.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fit document written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub sims: SimsArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Alternatives to test.
    #[arg(long, value_delimiter = ',', default_values = ["lognormal", "exponential", "powerlaw_cutoff"])]
    pub families: Vec<Family>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Subfield aggregate TSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Regressions to run.
    #[arg(long, value_delimiter = ',', default_values = ["overall", "collaboration", "single"])]
    pub mode: Vec<Mode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimFamily {
    Powerlaw,
    PowerlawCutoff,
    Lognormal,
    Exponential,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub family: SimFamily,
    /// Number of draws.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub xmin: u64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Output counts file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory holding result documents.
    #[arg(long)]
    pub dir: PathBuf,
}
