use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "rabi-cf",
    version,
    about = "Spectra of the quantum Rabi model H = ω a†a + g σx (a + a†) + Δ σz",
    long_about = "Spectra of the quantum Rabi model H = ω a†a + g σx (a + a†) + Δ σz.\n\n\
        Three solvers are available: the Bargmann-space (Schweber) continued fraction (method a), \
        the resolvent continued fraction of a parity chain (method b), and Sturm bisection on the \
        truncated chain (diag).\n\n\
        Exit codes: 0 success, 1 a tolerance check failed, 2 invalid usage or configuration, \
        3 numerical failure.\n\n\
        Every subcommand accepts --config FILE with `key = value` lines mirroring its flags; \
        explicit flags override the file."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest levels from one solver
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Level-by-level deviation between two solvers or orders
    #[command(args_override_self = true)]
    Compare(CompareArgs),
    /// Modified truncation that plants a pole at --e0
    #[command(args_override_self = true)]
    Pathological(PathologicalArgs),
    /// Tail-depth bound and convergence certificate at one energy
    #[command(args_override_self = true)]
    Bound(BoundArgs),
    /// Track both parity spectra over g or Δ and report their crossings
    #[command(args_override_self = true)]
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Bargmann-space continued fraction; both parities at once
    A,
    /// Poles of the resolvent continued fraction
    B,
    /// Sturm bisection
    Diag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// Replace the last diagonal entry only
    Diag,
    /// Replace the last diagonal entry and the last coupling
    DiagOffdiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanParamArg {
    G,
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

pub fn parse_window(s: &str) -> Result<Window, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("window [{lo}, {hi}] must be finite with LO < HI"));
    }
    Ok(Window { lo, hi })
}

/// Comma-separated truncation orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderList(pub Vec<usize>);

pub fn parse_orders(s: &str) -> Result<OrderList, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad order `{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(OrderList)
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Oscillator frequency ω (> 0)
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub omega: f64,
    /// Coupling g
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Qubit splitting Δ
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Accepted for scripting; every computation is deterministic regardless
    #[arg(long)]
    pub seedless: bool,
    /// Read `key = value` defaults from FILE (explicit flags take precedence)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Truncation order N; defaults to max(tail-depth bound at the window edge, 4·levels, 50)
    #[arg(long)]
    pub order: Option<usize>,
    /// Search window LO,HI; defaults to [−g²/ω − Δ − ω, (levels + 2)·ω]
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<Window>,
    /// Root or bisection tolerance in units of ω (default 1e-13 for a and b, 1e-11 for diag)
    #[arg(long)]
    pub solver_tol: Option<f64>,
    /// Guard half-width around the cut points x(E) = nω, in units of ω (method a)
    #[arg(long, default_value_t = rabi_cf::DEFAULT_POLE_GUARD)]
    pub eps_pole: f64,
    /// Sign-change samples per unit ω of window (methods a and b)
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Diag)]
    pub method: MethodArg,
    /// Parity chain(s); ignored by method a, which yields both
    #[arg(long, value_enum, default_value_t = ParityArg::Both)]
    pub parity: ParityArg,
    /// Number of levels to report (lowest first)
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::A)]
    pub first: MethodArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Diag)]
    pub second: MethodArg,
    /// Truncation order of the first solver (defaults as for --order)
    #[arg(long)]
    pub first_order: Option<usize>,
    /// Truncation order of the second solver (defaults as for --order)
    #[arg(long)]
    pub second_order: Option<usize>,
    /// Parity chain(s); must be `both` when either side is method a
    #[arg(long, value_enum, default_value_t = ParityArg::Both)]
    pub parity: ParityArg,
    /// Number of lowest levels compared
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    /// Largest acceptable deviation; exit 1 above it
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PathologicalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Energy at which the pole is planted
    #[arg(long, allow_hyphen_values = true)]
    pub e0: f64,
    #[arg(long, value_enum, default_value_t = ChainArg::Plus)]
    pub parity: ChainArg,
    /// Truncation order N (ignored when --sweep is given)
    #[arg(long, default_value_t = 30)]
    pub order: usize,
    /// Comma-separated list of orders, one table row each
    #[arg(long, value_parser = parse_orders)]
    pub sweep: Option<OrderList>,
    #[arg(long, value_enum, default_value_t = VariantArg::Diag)]
    pub variant: VariantArg,
    /// Largest acceptable planted-pole residual; exit 1 above it
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Energy E at which the tail is certified
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub energy: f64,
    #[arg(long, value_enum, default_value_t = ParityArg::Both)]
    pub parity: ParityArg,
    /// Last index checked by the certificate (default 10·bound)
    #[arg(long)]
    pub j_max: Option<usize>,
    /// Depth of the tail evaluation; the value at twice the depth is reported too
    #[arg(long, default_value_t = 200)]
    pub depth: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = ScanParamArg::G)]
    pub param: ScanParamArg,
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 600)]
    pub steps: usize,
    /// Levels tracked per parity chain
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
    #[arg(long, default_value_t = 300)]
    pub order: usize,
    /// Bisection tolerance of the tracked levels, in units of ω
    #[arg(long, default_value_t = rabi_cf::DEFAULT_EIG_TOL)]
    pub solver_tol: f64,
    /// Largest acceptable |x* − kω| / ω; exit 1 above it
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Write every tracked level (long format) to this file
    #[arg(long, value_name = "FILE")]
    pub track_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}
