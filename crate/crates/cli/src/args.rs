use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "odm", version, about = "Order-dependent mapping resummation of divergent perturbation series")]
pub struct Cli {
    /// Working precision in bits (at least 64).
    #[arg(long, global = true, env = "ODM_PREC_BITS", default_value_t = 512)]
    pub prec: u32,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact perturbative coefficients of a model.
    #[command(after_help = "CSV columns:\n  k            order of the coefficient\n  numerator    exact numerator\n  denominator  exact denominator\n  value        decimal value with --digits significant digits")]
    Series(SeriesCmd),

    /// Resummed values at one or more couplings.
    #[command(after_help = "CSV columns:\n  g_re, g_im          coupling\n  order               transformation order k\n  rho_re, rho_im      scale rho_k used at this order\n  lambda_re, lambda_im  mapped variable lambda(g)\n  value_re, value_im  resummed value\n  err_est             size of the first omitted term")]
    Sum(SumCmd),

    /// Strong-coupling coefficient estimates for every order up to --order.
    #[command(after_help = "CSV columns:\n  k                   transformation order\n  rho_re, rho_im      selected scale rho_k\n  tau_re, tau_im      k rho_k / A\n  criterion           how rho_k was obtained\n  estimate_re, estimate_im  order-k estimate of the leading strong-coupling coefficient\n  err_est             size of the first omitted term")]
    Strong(StrongCmd),

    /// Mapped polynomial and its scaled derivative on a real tau grid.
    #[command(name = "scan-rho", after_help = "CSV columns:\n  k          order of the polynomial\n  tau        k rho / A\n  p          P_k at rho = A tau / k\n  dp_scaled  A P'_k / k, the tau-derivative of P_k")]
    ScanRho(ScanCmd),

    /// Saddle-point analysis of the mapping for a given exponent alpha.
    #[command(after_help = "CSV columns:\n  quantity  name of the reported quantity\n  re, im    its value\n\nQuantities: mu_c, lambda_c (critical point); with --mu: mu, sigma and saddle_<i>;\nwith --balanced: balanced_mu, balanced_rate; with --radius and --rate-constant:\nboundary_constant, reduced_threshold, sector_half_angle.")]
    Saddle(SaddleCmd),

    /// Select the scales rho_k by root finding and fit their asymptotic form.
    #[command(name = "fit-rho", after_help = "JSON output is a schedule file (schemas/schedule.schema.json).\n\nCSV columns:\n  k                   order\n  rho_re, rho_im      selected scale\n  tau_re, tau_im      k rho_k / A\n  criterion           selection criterion\n  fitted_tau          mu - c / k^exponent from the fit")]
    FitRho(FitCmd),

    /// Compare the resummed value with a reference oracle and a Pade approximant.
    #[command(after_help = "CSV columns:\n  g_re, g_im          coupling\n  method              odm, pade or oracle\n  value_re, value_im  value from this method\n  abs_diff            distance to the oracle (empty without one)\n  digits              accuracy estimate of the oracle, or agreement digits with it")]
    Compare(CompareCmd),

    /// Regenerate the full reproduction bundle into a directory.
    #[command(after_help = "Files written:\n  critical.csv          alpha, mu_c, lambda_c, saddle_residual, rate_residual\n  integral_schedule.csv k, tau_re, tau_im, criterion, estimate, delta, delta_root\n  integral_low_orders.csv  k, rho_re, rho_im, estimate\n  oscillator_energies.csv  g, odm_re, odm_im, oracle_re, oracle_im, oracle_method, abs_diff\n  report.json           summary (schemas/report.schema.json)")]
    Report(ReportCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    #[value(name = "ix3-integral")]
    Integral,
    #[value(name = "ix3-qm")]
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleMode {
    Auto,
    Fitted,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    #[value(name = "zero-of-P'")]
    ZeroOfDerivative,
    #[value(name = "zero-of-P")]
    ZeroOfP,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutSide {
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Free,
    Fixed,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Built-in model.
    #[arg(long, value_enum, required_unless_present = "series_file", conflicts_with = "series_file")]
    pub model: Option<Model>,

    /// Series JSON file to use instead of a built-in model (schemas/series.schema.json).
    #[arg(long)]
    pub series_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Significant digits of decimal output.
    #[arg(long, default_value_t = 30)]
    pub digits: usize,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// How rho_k is chosen; defaults to `fitted` for ix3-qm and `auto` otherwise.
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleMode>,

    /// Schedule JSON for `--schedule file`.
    #[arg(long, required_if_eq("schedule", "file"))]
    pub schedule_file: Option<PathBuf>,

    /// Root criterion for automatic selection.
    #[arg(long, value_enum, default_value_t = Strategy::ZeroOfDerivative)]
    pub strategy: Strategy,
}

#[derive(Debug, Args)]
pub struct SeriesCmd {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Highest order K.
    #[arg(long)]
    pub order: usize,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SumCmd {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Coupling: decimal, p/q or a+bi. Repeat or separate with commas.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub g: Vec<String>,

    /// Transformation order k.
    #[arg(long)]
    pub order: usize,

    /// Side of the cut for negative real couplings.
    #[arg(long, value_enum)]
    pub side: Option<CutSide>,

    #[command(flatten)]
    pub schedule: ScheduleArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StrongCmd {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Highest transformation order.
    #[arg(long)]
    pub order: usize,

    #[command(flatten)]
    pub schedule: ScheduleArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanCmd {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Polynomial order; repeat or separate with commas.
    #[arg(long, required = true, value_delimiter = ',')]
    pub order: Vec<usize>,

    #[arg(long, default_value_t = 3.0)]
    pub tau_min: f64,

    #[arg(long, default_value_t = 7.0)]
    pub tau_max: f64,

    #[arg(long, default_value_t = 201)]
    pub samples: usize,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SaddleCmd {
    /// Mapping exponent, e.g. 5/2.
    #[arg(long)]
    pub alpha: String,

    /// Scale mu at which to report the saddles and the rate.
    #[arg(long)]
    pub mu: Option<String>,

    /// Also locate the scale where real and complex saddles balance.
    #[arg(long)]
    pub balanced: bool,

    /// R of the convergence domain (requires --rate-constant).
    #[arg(long, requires = "rate_constant")]
    pub radius: Option<f64>,

    /// C of the convergence domain (requires --radius).
    #[arg(long, requires = "radius", allow_hyphen_values = true)]
    pub rate_constant: Option<f64>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Highest order of the automatic selection.
    #[arg(long)]
    pub order: usize,

    #[arg(long, value_enum, default_value_t = Strategy::ZeroOfDerivative)]
    pub strategy: Strategy,

    #[arg(long, value_enum, default_value_t = FitKind::Free)]
    pub mode: FitKind,

    /// Limit mu for `--mode fixed`.
    #[arg(long, required_if_eq("mode", "fixed"))]
    pub mu_c: Option<String>,

    /// Power p of the correction c / k^p; defaults to 2/5 for ix3-qm and 1 otherwise.
    #[arg(long)]
    pub exponent: Option<String>,

    /// Average consecutive orders before fitting.
    #[arg(long)]
    pub odd_even: bool,

    /// Smallest order included in the fit.
    #[arg(long, default_value_t = 10)]
    pub k_min: usize,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, default_value_t = 30)]
    pub digits: usize,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Positive coupling(s); repeat or separate with commas.
    #[arg(long, required = true, value_delimiter = ',')]
    pub g: Vec<String>,

    /// Transformation order k.
    #[arg(long)]
    pub order: usize,

    /// Pade degrees L/M; defaults to the near-diagonal entry using order + 1 coefficients.
    #[arg(long)]
    pub pade: Option<String>,

    /// Basis size of the eigenvalue oracle (doubled for its accuracy estimate).
    #[arg(long, default_value_t = 100)]
    pub basis: usize,

    #[command(flatten)]
    pub schedule: ScheduleArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,

    /// Highest order for the integral.
    #[arg(long, default_value_t = 60)]
    pub integral_order: usize,

    /// Order used for the oscillator.
    #[arg(long, default_value_t = 55)]
    pub oscillator_order: usize,

    #[arg(long, default_value_t = 25)]
    pub digits: usize,
}
