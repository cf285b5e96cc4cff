use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Parser)]
#[command(name = "tailratio", version, about = "Audit tail-probability evidence ratios for similarity scores")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, env = "TAILRATIO_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Directory that receives the output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Worker threads; never changes output bytes.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic mated / non-mated score dataset.
    Gen(GenArgs),
    /// Fit a logistic mixture to one origin's scores.
    Fit(FitArgs),
    /// Tail probabilities, their ratio and the score likelihood ratio at a score.
    Eval(EvalArgs),
    /// Kolmogorov-Smirnov / Anderson-Darling tests of scores against a model.
    Gof(GofArgs),
    /// Model-expected vs observed right-tail frequencies.
    Tails(TailsArgs),
    /// Repeated split / fit / test p-value study.
    SimPvalues(SimPvaluesArgs),
    /// Tail ratios vs true likelihood ratios in the normal toy model.
    SimToy(SimToyArgs),
    /// Error rates by decision threshold, or a consistency check of tabulated rates.
    Thresholds(ThresholdsArgs),
    /// Plain-language wording of an evaluation.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Fit(_) => "fit",
            Command::Eval(_) => "eval",
            Command::Gof(_) => "gof",
            Command::Tails(_) => "tails",
            Command::SimPvalues(_) => "sim-pvalues",
            Command::SimToy(_) => "sim-toy",
            Command::Thresholds(_) => "thresholds",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginArg {
    Mated,
    Nonmated,
}

impl From<OriginArg> for tailratio::Origin {
    fn from(o: OriginArg) -> Self {
        match o {
            OriginArg::Mated => tailratio::Origin::Mated,
            OriginArg::Nonmated => tailratio::Origin::NonMated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatArg {
    Ks,
    Ad,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Asymptotic,
    Bootstrap,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitSettings {
    /// Mixture components.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 1_996)]
    pub n_mated: usize,
    #[arg(long, default_value_t = 2_000)]
    pub n_nonmated: usize,
    #[arg(long, default_value_t = 15)]
    pub feature_count: u8,
    /// Mated score model; a single logistic(15, 8) when absent.
    #[arg(long)]
    pub mated_model: Option<PathBuf>,
    /// Non-mated core model; the published 15-feature mixture when absent.
    #[arg(long)]
    pub nonmated_model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.013)]
    pub contamination_weight: f64,
    #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
    pub contamination_location: f64,
    #[arg(long, default_value_t = 25.0)]
    pub contamination_scale: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Score CSV.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, value_enum, default_value_t = OriginArg::Nonmated)]
    pub origin: OriginArg,
    /// Only use scores with this feature count.
    #[arg(long)]
    pub feature_count: Option<u8>,
    /// Fit on a random share of the scores instead of all of them.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[command(flatten)]
    pub fit: FitSettings,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Mated score model JSON.
    #[arg(long)]
    pub mated: PathBuf,
    /// Non-mated score model JSON; the published 15-feature mixture when absent.
    #[arg(long)]
    pub nonmated: Option<PathBuf>,
    /// Observed similarity score.
    #[arg(long, allow_negative_numbers = true)]
    pub score: f64,
    /// Also locate the score where the two tail probabilities are equal.
    #[arg(long)]
    pub tipping: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GofArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = OriginArg::Nonmated)]
    pub origin: OriginArg,
    #[arg(long)]
    pub feature_count: Option<u8>,
    #[arg(long, value_enum, default_value_t = StatArg::Both)]
    pub statistic: StatArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Bootstrap)]
    pub method: MethodArg,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 999)]
    pub replicates: usize,
    /// Refit the model to every bootstrap sample.
    #[arg(long)]
    pub refit: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TailsArgs {
    /// Non-mated model JSON; the published 15-feature mixture when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 25.0, 50.0], allow_negative_numbers = true)]
    pub cutpoints: Vec<f64>,
    /// Tally observed exceedances from this score CSV (non-mated rows).
    #[arg(long, conflicts_with = "counts")]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub feature_count: Option<u8>,
    /// Pre-tallied exceedance counts, one per cutpoint.
    #[arg(long, value_delimiter = ',', requires = "total")]
    pub counts: Option<Vec<u64>>,
    /// Total number of scores behind `--counts`.
    #[arg(long, requires = "counts")]
    pub total: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimPvaluesArgs {
    /// Non-mated scores to study; a default synthetic dataset when absent.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub feature_count: Option<u8>,
    /// Contamination weight of the synthetic dataset.
    #[arg(long, default_value_t = 0.013)]
    pub contamination_weight: f64,
    #[arg(long, default_value_t = 1_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.75)]
    pub fraction: f64,
    #[arg(long, default_value_t = 1_500)]
    pub resample_n: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Asymptotic)]
    pub ks_method: MethodArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Bootstrap)]
    pub ad_method: MethodArg,
    /// Bootstrap replicates for either test.
    #[arg(long, default_value_t = 199)]
    pub replicates: usize,
    #[command(flatten)]
    pub fit: FitSettings,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimToyArgs {
    #[arg(long, default_value_t = 1_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub pop_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub between_sd: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdsArgs {
    /// Tabulated correct-exclusion rates to check.
    #[arg(long, requires = "error")]
    pub exclusion: Option<PathBuf>,
    /// Tabulated erroneous-identification rates to check.
    #[arg(long, requires = "exclusion")]
    pub error: Option<PathBuf>,
    /// Score CSV whose non-mated rows are evaluated.
    #[arg(long, conflicts_with = "exclusion")]
    pub scores: Option<PathBuf>,
    /// Mated model used for every feature count.
    #[arg(long)]
    pub mated: Option<PathBuf>,
    /// Non-mated model used for every feature count.
    #[arg(long)]
    pub nonmated: Option<PathBuf>,
    /// Directory of `mated_<k>.json` / `nonmated_<k>.json`, used when a model is not given.
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 10.0, 100.0, 1_000.0, 10_000.0, 100_000.0])]
    pub thresholds: Vec<f64>,
    /// Allowed deviation of exclusion + identification from 1.
    #[arg(long, default_value_t = 0.001)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Output of `eval`.
    #[arg(long, conflicts_with_all = ["mated", "score"])]
    pub evidence: Option<PathBuf>,
    #[arg(long, requires = "score")]
    pub mated: Option<PathBuf>,
    #[arg(long)]
    pub nonmated: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true, requires = "mated")]
    pub score: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub sig_figs: u32,
}
