use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "fcurv", version, about = "Minkowski dimension and fractal curvatures of planar fractals from binary images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rasterize a preset or custom IFS attractor to a PBM image.
    Generate(GenerateArgs),
    /// Measure area, boundary length and Euler characteristic of the
    /// dilations of an image; writes the series CSV.
    Measure(MeasureArgs),
    /// Estimate dimension and curvatures from a series CSV.
    Estimate(EstimateArgs),
    /// Periodogram of detrended log-log residuals and the period estimate.
    Periodogram(PeriodogramArgs),
    /// Monte Carlo experiments on synthetic regressions.
    Lab(LabArgs),
    /// Measure and estimate in one run, with every artifact written to a directory.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Preset name (gasket, carpet, modcarpet, triangle, cross, supergasket,
    /// fullsquare), or the name given to a `--config` system.
    pub name: String,
    /// Canvas side in pixels.
    #[arg(default_value_t = 729)]
    pub side: usize,
    /// IFS file with one map per line: `ratio rotation_degrees reflect tx ty`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// White border in pixels around the unit square.
    #[arg(long, default_value_t = 0)]
    pub margin: usize,
    /// Fixed subdivision depth instead of the sub-pixel stopping rule.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Write ASCII (P1) instead of binary (P4) PBM.
    #[arg(long)]
    pub plain: bool,
    /// Output path; defaults to `<name>_<side>.pbm`.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScheduleChoice {
    /// Evenly spaced `-log ε` from `--x-first` to `--x-last` by `--x-step`.
    Log,
    /// Radii where lattice and Euclidean disks have equal area.
    EqualArea,
}

#[derive(Args, Debug, Clone)]
pub struct ScheduleArgs {
    #[arg(long, value_enum, default_value_t = ScheduleChoice::Log)]
    pub schedule: ScheduleChoice,
    #[arg(long, default_value_t = -4.5, allow_hyphen_values = true)]
    pub x_first: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub x_last: f64,
    #[arg(long, default_value_t = 0.02)]
    pub x_step: f64,
    /// Number of radii for the equal-area schedule.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Explicit comma-separated radii in pixels; overrides `--schedule`.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Smallest admissible radius in pixels; schedules reaching below it are rejected.
    #[arg(long, default_value_t = 2.0)]
    pub min_radius: f64,
    /// Keep only radii in `[lo, hi]`, as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    pub truncate: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    /// PBM image (P1 or P4); black pixels form the set.
    pub image: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Series CSV path; standard output when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Lre,
    Nre,
    /// NRE when the periodogram shows a significant period, LRE otherwise.
    Auto,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    /// One slope shared by all indices.
    Simultaneous,
    /// One fit per index; the slope is their median.
    Separate,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignRuleChoice {
    /// Any sign change excludes the index.
    Strict,
    /// Samples against the majority sign are dropped.
    Majority,
}

#[derive(Args, Debug, Clone)]
pub struct EstimateFlags {
    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    pub method: MethodChoice,
    /// Index set J, comma separated (subset of 0,1,2).
    #[arg(short = 'j', long = "indices", value_delimiter = ',', value_parser = clap::value_parser!(u8).range(0..=2))]
    pub indices: Option<Vec<u8>>,
    /// Number of Fourier harmonics, or `auto` to count periodogram peaks.
    #[arg(short, long, default_value = "4")]
    pub m: String,
    /// Known period of the oscillation in `-log ε`.
    #[arg(long)]
    pub h0: Option<f64>,
    /// Known dimension; only the intercepts and Fourier terms are fitted.
    #[arg(long)]
    pub fixed_s: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeChoice::Simultaneous)]
    pub mode: ModeChoice,
    /// Peak-to-median periodogram ratio needed for a period to count.
    #[arg(long, default_value_t = 20.0)]
    pub threshold: f64,
    /// Zero-padding factor of the periodogram.
    #[arg(long, default_value_t = 10)]
    pub pad: usize,
    /// Indices whose residuals feed the periodogram (default 0).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(0..=2))]
    pub period_indices: Option<Vec<u8>>,
    #[arg(long, value_enum, default_value_t = SignRuleChoice::Strict)]
    pub sign_rule: SignRuleChoice,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Series CSV written by `measure`.
    pub series: PathBuf,
    #[command(flatten)]
    pub flags: EstimateFlags,
    /// Keep only radii in `[lo, hi]`, as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    pub truncate: Option<Vec<f64>>,
    /// Image for a box-counting comparison.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Result CSV path (`quantity,k,j,value`).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PeriodogramArgs {
    /// Series CSV written by `measure`.
    pub series: PathBuf,
    /// Indices whose residuals enter the periodogram.
    #[arg(short = 'j', long = "indices", value_delimiter = ',', default_value = "0", value_parser = clap::value_parser!(u8).range(0..=2))]
    pub indices: Vec<u8>,
    #[arg(long, default_value_t = 10)]
    pub pad: usize,
    /// Harmonics in the period search, or `auto`.
    #[arg(short, long, default_value = "4")]
    pub m: String,
    #[arg(long, default_value_t = 20.0)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = SignRuleChoice::Strict)]
    pub sign_rule: SignRuleChoice,
    /// Periodogram CSV path (`freq,period_samples,power`).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LabArgs {
    #[command(subcommand)]
    pub experiment: LabExperiment,
}

#[derive(Subcommand, Debug)]
pub enum LabExperiment {
    /// RMSE and exceedance frequencies of the linear estimator against n.
    Consistency(ConsistencyArgs),
    /// Empirical distribution of the standardised linear combination `tᵀθ̂`.
    Normality(NormalityArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyChoice {
    /// `x_j = c·j^δ`.
    Power,
    /// `x_j = a0 + a·j`.
    Arithmetic,
}

#[derive(Args, Debug, Clone)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 1.585)]
    pub s: f64,
    /// Intercepts, one per index.
    #[arg(long, value_delimiter = ',', default_values_t = vec![-9.3, 4.2, 13.1], allow_hyphen_values = true)]
    pub beta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = FamilyChoice::Power)]
    pub family: FamilyChoice,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value_t = 0.4)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a0: f64,
    #[arg(long, default_value_t = 0.02)]
    pub a: f64,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ConsistencyArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    /// Error model: iid:SIGMA, ma:SIGMA:WINDOW, t:SIGMA:DOF, or cov:PATH for a
    /// whitespace or comma separated covariance matrix.
    #[arg(long, default_value = "iid:0.1")]
    pub error: String,
    /// Sample sizes.
    #[arg(short, long, value_delimiter = ',', default_values_t = vec![50, 100, 200, 400])]
    pub n: Vec<usize>,
    /// Thresholds for the exceedance frequencies.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.1])]
    pub eps: Vec<f64>,
    /// Trial report CSV path.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NormalityArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(short, long, default_value_t = 1000)]
    pub n: usize,
    /// Weights of `(β_0, …, β_d, s)`; defaults to the slope alone.
    #[arg(short, long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Option<Vec<f64>>,
    /// CSV of the standardised statistics.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// PBM image.
    pub image: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub flags: EstimateFlags,
    /// Directory for series.csv, result.csv and periodogram.csv.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
