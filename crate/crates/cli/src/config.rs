//! Argument model and grid-parsing helpers. Comma lists accept `a..b`
//! range sugar for integers, so `--p 2..6,8` means `2,3,4,5,6,8`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use radbound::moments::MomentOrder;
use radbound::numeric::parse_rational;

#[derive(Parser, Debug)]
#[command(
    name = "radbound",
    version,
    about = "Verifies Khintchine-type moment bounds for zero-sum sign sums, hypergeometric moment and tail bounds, and concentration of Lipschitz functionals on the permutation group",
    after_help = "Exit status: 0 all exact checks satisfied, 1 an exact check violated, 2 usage or configuration error. Monte-Carlo inconsistency never changes the exit status; it is flagged inside the document."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the two-link moment chain for zero-sum sign sums over a weight grid
    VerifyMain(VerifyMainArgs),
    /// Hypergeometric central moments, tail constants, and the sign-count identity
    Hypergeom(HypergeomArgs),
    /// Lipschitz tail bounds and product-functional moment bounds on permutations
    Concentration(ConcentrationArgs),
    /// Central-binomial sandwich, shifted-ratio chain, and gamma power bound
    Combinatorics(CombinatoricsArgs),
    /// CSV sweeps over p: chain verdicts or M(a,b,p) exploration data
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Full enumeration with exact verdicts (respects per-module caps)
    Exact,
    /// Seeded Monte-Carlo estimates beyond the exact caps
    Mc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output format for the report document
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output path ('-' = stdout). Relative paths resolve under
    /// RADBOUND_OUT_DIR when that variable is set; when --out is omitted and
    /// the variable is set, the document goes to <dir>/<command>.<ext>.
    #[arg(long)]
    pub out: Option<String>,
    /// Relative tolerance for floating-point verdicts
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Dyadic bits for transcendental brackets and decimal digits in CSV cells
    #[arg(long, default_value_t = 96)]
    pub precision_bits: u32,
}

#[derive(Args, Debug)]
pub struct VerifyMainArgs {
    /// Number of weights (even); required when --weights random
    #[arg(long = "N")]
    pub n_big: Option<usize>,
    /// Weight source: inline rationals "1,-1,3/2", a file path (one rational
    /// per line), or "random"
    #[arg(long, default_value = "random")]
    pub weights: String,
    /// How many random weight vectors to draw
    #[arg(long, default_value_t = 1)]
    pub count: u32,
    /// Moment orders p >= 2, e.g. "2,4,6", "2..10", or "2.5"
    #[arg(long, default_value = "2,4,6")]
    pub p: String,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    /// Monte-Carlo trials per estimate
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// RNG seed; drawn from the clock and echoed when omitted
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct HypergeomArgs {
    /// Half-split draw size; the population is N = 2n
    #[arg(long)]
    pub n: u64,
    /// Marked counts: "all" (1..=n) or a list/range
    #[arg(long, default_value = "all")]
    pub ell: String,
    /// Moment orders p >= 2
    #[arg(long, default_value = "2,4,6")]
    pub p: String,
    /// Tail grid for the empirical psi2 constant (rationals); derived from
    /// ell when omitted
    #[arg(long)]
    pub t: Option<String>,
    /// Echoed for reproducibility; this command draws nothing
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ConcentrationArgs {
    /// Dimension of the permutation group
    #[arg(long = "N")]
    pub n_big: Option<usize>,
    /// Weight source for a: inline list, file path, or "random"
    #[arg(long, default_value = "random")]
    pub weights: String,
    /// Weight source for b; defaults to the split pattern (1,..,1,-1,..,-1)
    /// for even N and to a copy of a for odd N
    #[arg(long)]
    pub b_weights: Option<String>,
    /// How many (a, b) pairs to draw when the source is random
    #[arg(long, default_value_t = 1)]
    pub count: u32,
    /// Moment orders p >= 2 for the product bound
    #[arg(long, default_value = "2,4")]
    pub p: String,
    /// Tail thresholds (nonnegative rationals)
    #[arg(long, default_value = "1,2,3,4")]
    pub t: String,
    /// Lipschitz constant for tail rescaling: "declared", "exhaustive", or a
    /// rational upper bound
    #[arg(long, default_value = "declared")]
    pub lipschitz: String,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CombinatoricsArgs {
    /// n values for the sandwich and the ratio chain
    #[arg(long, default_value = "1..20")]
    pub n: String,
    /// ell values per n for the ratio chain: "all" (1..=n) or a list/range
    #[arg(long, default_value = "all")]
    pub ell: String,
    /// Sample points for the gamma power bound (floats in [1, 170])
    #[arg(long, default_value = "1,1.5,2,3.5,5,10,20,50")]
    pub gamma_grid: String,
    /// Echoed for reproducibility; this command draws nothing
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepTarget {
    /// Chain verdict per p with the comparison-ratio column
    Chain,
    /// M(a,b,p) exploration data per p (no verdicts)
    MRatio,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "chain")]
    pub target: SweepTarget,
    /// Number of weights; required when --weights random
    #[arg(long = "N")]
    pub n_big: Option<usize>,
    #[arg(long, default_value = "random")]
    pub weights: String,
    /// Second weight vector for the m-ratio target; same default rule as the
    /// concentration command
    #[arg(long)]
    pub b_weights: Option<String>,
    /// Sweep grid of moment orders; an empty string yields a header-only CSV
    #[arg(long, default_value = "2..10")]
    pub p: String,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; sweeps always emit CSV
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 96)]
    pub precision_bits: u32,
}

/// Expands "1,3,5..8" to `[1, 3, 5, 6, 7, 8]`. An empty string is an empty
/// grid.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
            let hi: u64 = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
            if lo > hi {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| format!("bad integer {part:?}"))?);
        }
    }
    Ok(out)
}

/// Moment orders: integers become exact orders, anything with a decimal
/// point becomes a real order; ranges expand over integers.
pub fn parse_order_list(s: &str) -> Result<Vec<MomentOrder>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u32 = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
            let hi: u32 = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
            if lo > hi {
                return Err(format!("empty range {part:?}"));
            }
            for p in lo..=hi {
                out.push(MomentOrder::integer(p).map_err(|e| e.to_string())?);
            }
        } else {
            out.push(part.parse::<MomentOrder>().map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Comma list of exact rationals ("num/den" or integers).
pub fn parse_rational_list(s: &str) -> Result<Vec<BigRational>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| parse_rational(part).map_err(|e| e.to_string()))
        .collect()
}

/// Comma list of floats.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad float {part:?}"))
        })
        .collect()
}

/// "all" expands to `1..=n`; anything else parses as a list/range.
pub fn parse_ell_list(s: &str, n: u64) -> Result<Vec<u64>, String> {
    if s.trim() == "all" {
        Ok((1..=n).collect())
    } else {
        parse_u64_list(s)
    }
}
