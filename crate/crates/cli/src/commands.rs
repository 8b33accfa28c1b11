//! Subcommand runners. Each builds a report document from the parsed
//! arguments, renders it in the requested format, and reports the exit code
//! derived from the exact verdicts. Rows are emitted in a fixed order
//! (vector-major, then grid order), so a fixed configuration and seed yield
//! identical bytes up to the timestamp line.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use num::rational::BigRational;
use num::One;
use radbound::concentration::{
    lipschitz_bound_check, m_explorer_exact, m_explorer_mc, maurey_tail_check,
    maurey_tail_mc_check, product_moment_bound_check, product_moment_bound_mc_check,
    LipschitzSpec, MExplorerRecord, ProductFunctional, MAX_LIPSCHITZ_BRUTE_N,
};
use radbound::combinatorics::{
    binomial_ratio_chain_check, extended_ratio_report, gamma_upper_bound_check,
    stirling_sandwich_check,
};
use radbound::hypergeometric::{
    central_moment_bound_check, default_psi2_grid, psi2_report, sign_count_identity_check,
    zero_one_moment_check, HypergeomParams,
};
use radbound::moments::{constrained_khintchine_check, WeightVector};
use radbound::numeric::{parse_rational, MAX_PRECISION_BITS};
use radbound::permutation::constrained_khintchine_mc_check;
use radbound::report::{statements, BoundReport, Method, Tolerance, Value};
use radbound::sampling::SeededSampler;

use crate::config::{
    parse_ell_list, parse_f64_list, parse_order_list, parse_rational_list, parse_u64_list, Cli,
    CombinatoricsArgs, Command, ConcentrationArgs, Format, HypergeomArgs, Mode, OutputArgs,
    SweepArgs, SweepTarget, VerifyMainArgs,
};
use crate::document::{csv_digits, join_rationals, resolve_out_path, ReportDocument};

/// Every failure a runner can hit is a configuration problem (exit 2); a
/// violated bound is not an error but an exit-1 outcome.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<radbound::Error> for CliError {
    fn from(e: radbound::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Rendered document plus where to put it; `path: None` means stdout. The
/// summary is one human line per report, meant for stderr.
pub struct RunOutcome {
    pub text: String,
    pub path: Option<PathBuf>,
    pub exit: i32,
    pub summary: String,
}

pub fn run(cli: Cli) -> Result<RunOutcome, CliError> {
    match cli.command {
        Command::VerifyMain(args) => run_verify_main(args),
        Command::Hypergeom(args) => run_hypergeom(args),
        Command::Concentration(args) => run_concentration(args),
        Command::Combinatorics(args) => run_combinatorics(args),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn auto_seed() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0x9e37_79b9_7f4a_7c15)
}

fn check_bits(bits: u32) -> Result<(), CliError> {
    if !(16..=MAX_PRECISION_BITS).contains(&bits) {
        return Err(usage(format!(
            "--precision-bits must lie in 16..={MAX_PRECISION_BITS}, got {bits}"
        )));
    }
    Ok(())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::Mc => "mc",
    }
}

/// Resolves the seed the run will actually use: an explicit seed wins, a run
/// that draws randomness gets a clock seed (echoed in the config), and a
/// fully deterministic run gets none.
fn resolve_seed(explicit: Option<u64>, draws_randomness: bool) -> Option<u64> {
    match (explicit, draws_randomness) {
        (Some(s), _) => Some(s),
        (None, true) => Some(auto_seed()),
        (None, false) => None,
    }
}

fn next_mc_seed(base: Option<u64>, calls: &mut u64) -> u64 {
    let s = base.expect("sampling runs always resolve a seed").wrapping_add(*calls);
    *calls += 1;
    s
}

enum WeightSource {
    Random,
    Fixed(Vec<BigRational>),
}

impl WeightSource {
    fn is_random(&self) -> bool {
        matches!(self, WeightSource::Random)
    }
}

/// "random" draws from the seeded sampler, an existing path reads one
/// rational per line (blank lines and `#` comments skipped), anything else
/// parses as an inline comma list.
fn resolve_weight_source(s: &str) -> Result<WeightSource, CliError> {
    let trimmed = s.trim();
    if trimmed == "random" {
        return Ok(WeightSource::Random);
    }
    let path = std::path::Path::new(trimmed);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read weight file {trimmed:?}: {e}")))?;
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            values.push(
                parse_rational(line)
                    .map_err(|e| usage(format!("{trimmed}:{}: {e}", idx + 1)))?,
            );
        }
        if values.is_empty() {
            return Err(usage(format!("weight file {trimmed:?} holds no values")));
        }
        return Ok(WeightSource::Fixed(values));
    }
    match parse_rational_list(trimmed) {
        Ok(values) if !values.is_empty() => Ok(WeightSource::Fixed(values)),
        _ => Err(usage(format!(
            "{trimmed:?} is neither \"random\", an existing file, nor an inline list like \"1,-1,3/2\""
        ))),
    }
}

/// Random sources yield `count` vectors of length `--N`; fixed sources yield
/// one vector and only cross-check `--N` when it was given.
fn weight_vectors(
    source: &WeightSource,
    n_big: Option<usize>,
    count: u32,
    sampler: &mut SeededSampler,
    flag: &str,
) -> Result<Vec<WeightVector>, CliError> {
    match source {
        WeightSource::Random => {
            let n = n_big.ok_or_else(|| usage(format!("--N is required when {flag} is random")))?;
            (0..count.max(1))
                .map(|_| sampler.weights(n).map_err(CliError::from))
                .collect()
        }
        WeightSource::Fixed(values) => {
            if let Some(n) = n_big {
                if n != values.len() {
                    return Err(usage(format!(
                        "--N {n} does not match the {} supplied weights",
                        values.len()
                    )));
                }
            }
            Ok(vec![WeightVector::new(values.clone())?])
        }
    }
}

/// Default second vector: the split pattern `(1, .., 1, -1, .., -1)` for
/// even length, a copy of `a` for odd length.
fn default_b(a: &WeightVector) -> Result<WeightVector, CliError> {
    let n = a.len();
    if n % 2 == 0 && n > 0 {
        let mut values = vec![BigRational::one(); n / 2];
        values.extend(std::iter::repeat(-BigRational::one()).take(n / 2));
        Ok(WeightVector::new(values)?)
    } else {
        Ok(a.clone())
    }
}

fn resolve_b(
    b_source: &Option<WeightSource>,
    a: &WeightVector,
    sampler: &mut SeededSampler,
) -> Result<WeightVector, CliError> {
    let n = a.len();
    match b_source {
        None => default_b(a),
        Some(WeightSource::Random) => Ok(sampler.weights(n)?),
        Some(WeightSource::Fixed(values)) => {
            if values.len() != n {
                return Err(usage(format!(
                    "--b-weights has {} entries but the first vector has {n}",
                    values.len()
                )));
            }
            Ok(WeightVector::new(values.clone())?)
        }
    }
}

fn summarize(reports: &[BoundReport]) -> String {
    let mut out = String::new();
    for report in reports {
        if report.id == statements::MOMENT_RATIO {
            let get = |key: &str| report.params.get(key).map(String::as_str).unwrap_or("?");
            out.push_str(&format!(
                "{}: N={} p={} ratio={}\n",
                report.id,
                get("N"),
                get("p"),
                get("ratio")
            ));
        } else {
            out.push_str(&report.summary_line());
            out.push('\n');
        }
    }
    out
}

fn finish(
    doc: ReportDocument,
    output: &OutputArgs,
    command: &str,
) -> Result<RunOutcome, CliError> {
    let text = match output.format {
        Format::Json => doc.to_json(),
        Format::Csv => doc.to_csv(csv_digits(output.precision_bits), false, None),
    };
    Ok(RunOutcome {
        summary: summarize(&doc.reports),
        exit: doc.exit_code(),
        path: resolve_out_path(output.out.as_deref(), command, output.format.extension()),
        text,
    })
}

fn run_verify_main(args: VerifyMainArgs) -> Result<RunOutcome, CliError> {
    check_bits(args.output.precision_bits)?;
    let tol = Tolerance { rel: args.output.tol };
    let orders = parse_order_list(&args.p).map_err(usage)?;
    if orders.is_empty() {
        return Err(usage("--p must name at least one moment order"));
    }
    let source = resolve_weight_source(&args.weights)?;
    let seed = resolve_seed(args.seed, source.is_random() || args.mode == Mode::Mc);
    let mut sampler = SeededSampler::new(seed.unwrap_or(0));
    let vectors = weight_vectors(&source, args.n_big, args.count, &mut sampler, "--weights")?;
    let multi = vectors.len() > 1;
    let mut mc_calls = 0u64;
    let mut reports = Vec::new();
    for (k, a) in vectors.iter().enumerate() {
        for &order in &orders {
            let pair = match args.mode {
                Mode::Exact => constrained_khintchine_check(a, order, tol)?,
                Mode::Mc => constrained_khintchine_mc_check(
                    a,
                    order,
                    args.trials,
                    next_mc_seed(seed, &mut mc_calls),
                    tol,
                )?,
            };
            for mut report in pair {
                report = report.with_param("a", join_rationals(a.as_slice()));
                if multi {
                    report = report.with_param("k", k);
                }
                reports.push(report);
            }
        }
    }
    let mut cfg = BTreeMap::new();
    cfg.insert("weights".to_owned(), args.weights.clone());
    if let Some(n) = args.n_big {
        cfg.insert("N".to_owned(), n.to_string());
    }
    if source.is_random() {
        cfg.insert("count".to_owned(), args.count.to_string());
    }
    cfg.insert("p".to_owned(), args.p.clone());
    cfg.insert("mode".to_owned(), mode_name(args.mode).to_owned());
    if args.mode == Mode::Mc {
        cfg.insert("trials".to_owned(), args.trials.to_string());
    }
    if let Some(s) = seed {
        cfg.insert("seed".to_owned(), s.to_string());
    }
    cfg.insert("tol".to_owned(), args.output.tol.to_string());
    cfg.insert("precision_bits".to_owned(), args.output.precision_bits.to_string());
    finish(ReportDocument::new("verify-main", cfg, reports), &args.output, "verify-main")
}

fn run_hypergeom(args: HypergeomArgs) -> Result<RunOutcome, CliError> {
    check_bits(args.output.precision_bits)?;
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let tol = Tolerance { rel: args.output.tol };
    let ells = parse_ell_list(&args.ell, args.n).map_err(usage)?;
    if ells.is_empty() {
        return Err(usage("--ell must name at least one value"));
    }
    let orders = parse_order_list(&args.p).map_err(usage)?;
    let custom_grid = args
        .t
        .as_deref()
        .map(parse_rational_list)
        .transpose()
        .map_err(usage)?;
    let mut reports = Vec::new();
    for &ell in &ells {
        if ell == 0 {
            if args.n > 12 {
                return Err(usage(
                    "ell=0 is degenerate: only the sign-count identity applies and its \
                     enumeration needs n <= 12",
                ));
            }
            reports.push(sign_count_identity_check(args.n, 0)?);
            continue;
        }
        for &order in &orders {
            reports.extend(central_moment_bound_check(args.n, ell, order, tol)?);
            reports.push(zero_one_moment_check(args.n, ell, order, tol)?);
        }
        if args.n <= 12 {
            reports.push(sign_count_identity_check(args.n, ell)?);
        }
        let params = HypergeomParams::new(2 * args.n, args.n, ell)?;
        let grid = match &custom_grid {
            Some(g) => g.clone(),
            None => default_psi2_grid(ell),
        };
        reports.push(psi2_report(&params, &grid, tol)?);
        reports.push(extended_ratio_report(2 * args.n, args.n, ell)?);
    }
    let mut cfg = BTreeMap::new();
    cfg.insert("n".to_owned(), args.n.to_string());
    cfg.insert("ell".to_owned(), args.ell.clone());
    cfg.insert("p".to_owned(), args.p.clone());
    if let Some(t) = &args.t {
        cfg.insert("t".to_owned(), t.clone());
    }
    if let Some(s) = args.seed {
        cfg.insert("seed".to_owned(), s.to_string());
    }
    cfg.insert("tol".to_owned(), args.output.tol.to_string());
    cfg.insert("precision_bits".to_owned(), args.output.precision_bits.to_string());
    finish(ReportDocument::new("hypergeom", cfg, reports), &args.output, "hypergeom")
}

fn parse_lipschitz_spec(s: &str) -> Result<LipschitzSpec, CliError> {
    match s.trim() {
        "declared" => Ok(LipschitzSpec::Auto),
        "exhaustive" => Ok(LipschitzSpec::Exhaustive),
        other => match parse_rational(other) {
            Ok(q) => Ok(LipschitzSpec::Fixed(q)),
            Err(_) => Err(usage(format!(
                "--lipschitz must be \"declared\", \"exhaustive\", or a rational constant, got {other:?}"
            ))),
        },
    }
}

fn run_concentration(args: ConcentrationArgs) -> Result<RunOutcome, CliError> {
    check_bits(args.output.precision_bits)?;
    let tol = Tolerance { rel: args.output.tol };
    let orders = parse_order_list(&args.p).map_err(usage)?;
    let ts = parse_rational_list(&args.t).map_err(usage)?;
    let spec = parse_lipschitz_spec(&args.lipschitz)?;
    let a_source = resolve_weight_source(&args.weights)?;
    let b_source = args
        .b_weights
        .as_deref()
        .map(resolve_weight_source)
        .transpose()?;
    let draws = a_source.is_random()
        || b_source.as_ref().is_some_and(WeightSource::is_random)
        || args.mode == Mode::Mc;
    let seed = resolve_seed(args.seed, draws);
    let mut sampler = SeededSampler::new(seed.unwrap_or(0));
    let a_vectors = weight_vectors(&a_source, args.n_big, args.count, &mut sampler, "--weights")?;
    let pairs = a_vectors
        .into_iter()
        .map(|a| {
            let b = resolve_b(&b_source, &a, &mut sampler)?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let multi = pairs.len() > 1;
    let mut mc_calls = 0u64;
    let mut reports = Vec::new();
    for (k, (a, b)) in pairs.iter().enumerate() {
        let f = ProductFunctional::new(a.clone(), b.clone())?;
        let mut rows = Vec::new();
        match args.mode {
            Mode::Exact => {
                if a.len() <= MAX_LIPSCHITZ_BRUTE_N {
                    rows.push(lipschitz_bound_check(a, b)?);
                }
                rows.extend(maurey_tail_check(&f, &ts, &spec, args.output.precision_bits, tol)?);
                for &order in &orders {
                    rows.extend(product_moment_bound_check(a, b, order, tol)?);
                }
            }
            Mode::Mc => {
                rows.extend(maurey_tail_mc_check(
                    &f,
                    &ts,
                    &spec,
                    args.trials,
                    next_mc_seed(seed, &mut mc_calls),
                )?);
                for &order in &orders {
                    rows.extend(product_moment_bound_mc_check(
                        a,
                        b,
                        order,
                        args.trials,
                        next_mc_seed(seed, &mut mc_calls),
                        tol,
                    )?);
                }
            }
        }
        for mut row in rows {
            row = row
                .with_param("a", join_rationals(a.as_slice()))
                .with_param("b", join_rationals(b.as_slice()));
            if multi {
                row = row.with_param("k", k);
            }
            reports.push(row);
        }
    }
    let mut cfg = BTreeMap::new();
    cfg.insert("weights".to_owned(), args.weights.clone());
    if let Some(b) = &args.b_weights {
        cfg.insert("b_weights".to_owned(), b.clone());
    }
    if let Some(n) = args.n_big {
        cfg.insert("N".to_owned(), n.to_string());
    }
    if a_source.is_random() {
        cfg.insert("count".to_owned(), args.count.to_string());
    }
    cfg.insert("p".to_owned(), args.p.clone());
    cfg.insert("t".to_owned(), args.t.clone());
    cfg.insert("lipschitz".to_owned(), args.lipschitz.clone());
    cfg.insert("mode".to_owned(), mode_name(args.mode).to_owned());
    if args.mode == Mode::Mc {
        cfg.insert("trials".to_owned(), args.trials.to_string());
    }
    if let Some(s) = seed {
        cfg.insert("seed".to_owned(), s.to_string());
    }
    cfg.insert("tol".to_owned(), args.output.tol.to_string());
    cfg.insert("precision_bits".to_owned(), args.output.precision_bits.to_string());
    finish(ReportDocument::new("concentration", cfg, reports), &args.output, "concentration")
}

fn run_combinatorics(args: CombinatoricsArgs) -> Result<RunOutcome, CliError> {
    check_bits(args.output.precision_bits)?;
    let tol = Tolerance { rel: args.output.tol };
    let ns = parse_u64_list(&args.n).map_err(usage)?;
    if ns.is_empty() {
        return Err(usage("--n must name at least one value"));
    }
    let grid = parse_f64_list(&args.gamma_grid).map_err(usage)?;
    let mut reports = Vec::new();
    for &n in &ns {
        reports.extend(stirling_sandwich_check(n)?);
    }
    for &n in &ns {
        for ell in parse_ell_list(&args.ell, n).map_err(usage)? {
            reports.push(binomial_ratio_chain_check(n, ell)?);
        }
    }
    for &x in &grid {
        reports.push(gamma_upper_bound_check(x, tol)?.with_param("t", x));
    }
    let mut cfg = BTreeMap::new();
    cfg.insert("n".to_owned(), args.n.clone());
    cfg.insert("ell".to_owned(), args.ell.clone());
    cfg.insert("gamma_grid".to_owned(), args.gamma_grid.clone());
    if let Some(s) = args.seed {
        cfg.insert("seed".to_owned(), s.to_string());
    }
    cfg.insert("tol".to_owned(), args.output.tol.to_string());
    cfg.insert("precision_bits".to_owned(), args.output.precision_bits.to_string());
    finish(ReportDocument::new("combinatorics", cfg, reports), &args.output, "combinatorics")
}

/// The sweep's comparison column: `sqrt(2p) / (sqrt(N) * p / ln N)`, the
/// ratio of the proven constant to the conjectured growth shape with its
/// unknown constant omitted.
fn comparison_ratio(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    (2.0 * p).sqrt() / (nf.sqrt() * p / nf.ln())
}

fn m_ratio_report(record: MExplorerRecord) -> BoundReport {
    let mut report = BoundReport::exact_verdict(
        statements::MOMENT_RATIO,
        Value::approx(record.m_p),
        Value::approx(record.m_2),
        true,
    )
    .with_param("N", record.n)
    .with_param("p", record.p.clone())
    .with_param("ratio", format!("{}", record.ratio))
    .with_note(record.note);
    if let Some(v) = &record.m_p_pow_p {
        report = report.with_param("m_p_pow_p", v);
    }
    if let Some(v) = &record.m_2_sq {
        report = report.with_param("m_2_sq", v);
    }
    if record.method == Method::MonteCarlo {
        report = report.with_sampling(record.samples.unwrap_or(0), record.seed.unwrap_or(0));
    }
    report
}

fn run_sweep(args: SweepArgs) -> Result<RunOutcome, CliError> {
    check_bits(args.precision_bits)?;
    let tol = Tolerance { rel: args.tol };
    let orders = parse_order_list(&args.p).map_err(usage)?;
    let a_source = resolve_weight_source(&args.weights)?;
    let b_source = args
        .b_weights
        .as_deref()
        .map(resolve_weight_source)
        .transpose()?;
    let draws = a_source.is_random()
        || b_source.as_ref().is_some_and(WeightSource::is_random)
        || args.mode == Mode::Mc;
    let seed = resolve_seed(args.seed, draws);
    let mut sampler = SeededSampler::new(seed.unwrap_or(0));
    let a = weight_vectors(&a_source, args.n_big, 1, &mut sampler, "--weights")?
        .pop()
        .expect("one vector");
    let mut mc_calls = 0u64;
    let mut reports = Vec::new();
    let mut note = None;
    let mut cfg = BTreeMap::new();
    match args.target {
        SweepTarget::Chain => {
            cfg.insert("target".to_owned(), "chain".to_owned());
            for &order in &orders {
                let [link1, _] = match args.mode {
                    Mode::Exact => constrained_khintchine_check(&a, order, tol)?,
                    Mode::Mc => constrained_khintchine_mc_check(
                        &a,
                        order,
                        args.trials,
                        next_mc_seed(seed, &mut mc_calls),
                        tol,
                    )?,
                };
                let ratio = comparison_ratio(a.len(), order.as_f64());
                reports.push(link1.with_param("ratio", format!("{ratio}")));
            }
        }
        SweepTarget::MRatio => {
            cfg.insert("target".to_owned(), "m-ratio".to_owned());
            note = Some(radbound::concentration::M_INTERPRETATION_NOTE);
            let b = resolve_b(&b_source, &a, &mut sampler)?;
            cfg.insert("b".to_owned(), join_rationals(b.as_slice()));
            for &order in &orders {
                let record = match args.mode {
                    Mode::Exact => m_explorer_exact(&a, &b, order)?,
                    Mode::Mc => m_explorer_mc(
                        &a,
                        &b,
                        order,
                        args.trials,
                        next_mc_seed(seed, &mut mc_calls),
                    )?,
                };
                reports.push(m_ratio_report(record));
            }
        }
    }
    cfg.insert("a".to_owned(), join_rationals(a.as_slice()));
    cfg.insert("weights".to_owned(), args.weights.clone());
    if let Some(b) = &args.b_weights {
        cfg.insert("b_weights".to_owned(), b.clone());
    }
    if let Some(n) = args.n_big {
        cfg.insert("N".to_owned(), n.to_string());
    }
    cfg.insert("p".to_owned(), args.p.clone());
    cfg.insert("mode".to_owned(), mode_name(args.mode).to_owned());
    if args.mode == Mode::Mc {
        cfg.insert("trials".to_owned(), args.trials.to_string());
    }
    if let Some(s) = seed {
        cfg.insert("seed".to_owned(), s.to_string());
    }
    cfg.insert("tol".to_owned(), args.tol.to_string());
    cfg.insert("precision_bits".to_owned(), args.precision_bits.to_string());
    let doc = ReportDocument::new("sweep", cfg, reports);
    Ok(RunOutcome {
        summary: summarize(&doc.reports),
        exit: doc.exit_code(),
        path: resolve_out_path(args.out.as_deref(), "sweep", "csv"),
        text: doc.to_csv(csv_digits(args.precision_bits), true, note),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn run_args(args: &[&str]) -> Result<RunOutcome, CliError> {
        run(Cli::parse_from(args))
    }

    #[test]
    fn verify_main_exact_inline_weights() {
        let outcome =
            run_args(&["radbound", "verify-main", "--weights", "1,-1", "--p", "2,3", "--out", "-"])
                .unwrap();
        assert_eq!(outcome.exit, 0);
        assert_eq!(outcome.path, None);
        let json: serde_json::Value = serde_json::from_str(&outcome.text).unwrap();
        let reports = json["reports"].as_array().unwrap();
        assert_eq!(reports.len(), 4, "two links per order");
        assert_eq!(reports[0]["id"], "eq4-chain-1");
        assert_eq!(reports[0]["params"]["a"], "1,-1");
        assert!(json["config"]["params"].get("seed").is_none(), "no seed on a deterministic run");
        assert!(outcome.summary.contains("holds"));
    }

    #[test]
    fn verify_main_mc_is_seed_deterministic() {
        let args = [
            "radbound",
            "verify-main",
            "--N",
            "10",
            "--count",
            "2",
            "--mode",
            "mc",
            "--trials",
            "400",
            "--seed",
            "9",
            "--p",
            "2",
        ];
        let one = run_args(&args).unwrap();
        let two = run_args(&args).unwrap();
        let strip = |text: &str| {
            text.lines()
                .filter(|l| !l.contains("timestamp"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&one.text), strip(&two.text));
        assert_eq!(one.exit, 0, "mc runs exit 0");
        let json: serde_json::Value = serde_json::from_str(&one.text).unwrap();
        assert_eq!(json["config"]["params"]["seed"], "9");
        let reports = json["reports"].as_array().unwrap();
        assert_eq!(reports.len(), 4);
        assert_eq!(reports[0]["params"]["k"], "0");
        assert_eq!(reports[0]["method"], "monte-carlo");
    }

    #[test]
    fn verify_main_rejects_bad_setups() {
        assert!(matches!(
            run_args(&["radbound", "verify-main", "--weights", "1,-1", "--p", ""]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            run_args(&["radbound", "verify-main"]),
            Err(CliError::Usage(_)),
        ));
        assert!(matches!(
            run_args(&["radbound", "verify-main", "--weights", "1,-1,1", "--p", "2"]),
            Err(CliError::Usage(_)),
        ));
        assert!(matches!(
            run_args(&["radbound", "verify-main", "--N", "4", "--weights", "1,-1", "--p", "2"]),
            Err(CliError::Usage(_)),
        ));
        assert!(matches!(
            run_args(&["radbound", "verify-main", "--weights", "1,-1", "--precision-bits", "8"]),
            Err(CliError::Usage(_)),
        ));
    }

    #[test]
    fn hypergeom_rows_cover_every_check() {
        let outcome = run_args(&[
            "radbound",
            "hypergeom",
            "--n",
            "4",
            "--ell",
            "2",
            "--p",
            "2,4",
        ])
        .unwrap();
        assert_eq!(outcome.exit, 0);
        let json: serde_json::Value = serde_json::from_str(&outcome.text).unwrap();
        let ids: Vec<&str> = json["reports"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["id"].as_str().unwrap())
            .collect();
        assert_eq!(
            ids,
            vec![
                "prop31-sqrt2",
                "prop31-direct2",
                "cor33",
                "prop31-sqrt2",
                "prop31-direct2",
                "cor33",
                "qk-identity",
                "psi2-cemp",
                "rem35-ratio",
            ],
            "two orders then the per-ell rows"
        );
    }

    #[test]
    fn hypergeom_ell_zero_is_identity_only() {
        let outcome = run_args(&["radbound", "hypergeom", "--n", "3", "--ell", "0"]).unwrap();
        let json: serde_json::Value = serde_json::from_str(&outcome.text).unwrap();
        let reports = json["reports"].as_array().unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0]["id"], "qk-identity");
        assert!(run_args(&["radbound", "hypergeom", "--n", "13", "--ell", "0"]).is_err());
    }

    #[test]
    fn concentration_exact_emits_lipschitz_tail_and_moment_rows() {
        let outcome = run_args(&[
            "radbound",
            "concentration",
            "--weights",
            "1,-1,2,0",
            "--t",
            "1,2",
            "--p",
            "2",
        ])
        .unwrap();
        assert_eq!(outcome.exit, 0);
        let json: serde_json::Value = serde_json::from_str(&outcome.text).unwrap();
        let ids: Vec<&str> = json["reports"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["id"].as_str().unwrap())
            .collect();
        assert_eq!(ids, vec!["lipschitz-2ab", "eq7", "eq7", "eq10", "eq10-chained"]);
        let b = json["reports"][0]["params"]["b"].as_str().unwrap();
        assert_eq!(b, "1,1,-1,-1", "default b is the split pattern");
    }

    #[test]
    fn concentration_mc_runs_beyond_the_exact_cap() {
        let outcome = run_args(&[
            "radbound",
            "concentration",
            "--N",
            "12",
            "--mode",
            "mc",
            "--trials",
            "300",
            "--seed",
            "5",
            "--t",
            "1",
            "--p",
            "2",
        ])
        .unwrap();
        assert_eq!(outcome.exit, 0, "mc never sets exit 1");
        let json: serde_json::Value = serde_json::from_str(&outcome.text).unwrap();
        for report in json["reports"].as_array().unwrap() {
            assert_eq!(report["method"], "monte-carlo");
            assert!(report["seed"].is_number());
        }
    }

    #[test]
    fn concentration_rejects_exact_beyond_cap_and_bad_lipschitz() {
        assert!(run_args(&["radbound", "concentration", "--N", "9", "--seed", "1"]).is_err());
        assert!(run_args(&[
            "radbound",
            "concentration",
            "--weights",
            "1,-1",
            "--lipschitz",
            "fast"
        ])
        .is_err());
    }

    #[test]
    fn combinatorics_rows_and_csv_render() {
        let outcome = run_args(&[
            "radbound",
            "combinatorics",
            "--n",
            "1..3",
            "--gamma-grid",
            "1,2",
            "--format",
            "csv",
        ])
        .unwrap();
        assert_eq!(outcome.exit, 0);
        let lines: Vec<&str> = outcome.text.lines().collect();
        assert!(lines[0].starts_with("# radbound"));
        assert_eq!(
            lines[3],
            "statement_id,N,n,ell,p,t,lhs,rhs,slack,satisfied,method,samples,seed"
        );
        let stirling = lines.iter().filter(|l| l.starts_with("stirling-")).count();
        let ratio = lines.iter().filter(|l| l.starts_with("eq12-ratio")).count();
        let gamma = lines.iter().filter(|l| l.starts_with("gamma-power")).count();
        assert_eq!((stirling, ratio, gamma), (6, 6, 2));
    }

    #[test]
    fn sweep_chain_is_csv_with_ratio_column() {
        let outcome = run_args(&[
            "radbound",
            "sweep",
            "--weights",
            "1,-1,1,-1",
            "--p",
            "2..4",
        ])
        .unwrap();
        assert_eq!(outcome.exit, 0);
        let lines: Vec<&str> = outcome.text.lines().collect();
        assert!(lines[3].ends_with(",ratio"));
        let rows: Vec<&&str> = lines.iter().filter(|l| l.starts_with("eq4-chain-1")).collect();
        assert_eq!(rows.len(), 3, "one row per order, link one only");
        let expected = comparison_ratio(4, 2.0).to_string();
        assert!(rows[0].ends_with(&expected));
    }

    #[test]
    fn sweep_m_ratio_flags_the_interpretation() {
        let outcome = run_args(&[
            "radbound",
            "sweep",
            "--target",
            "m-ratio",
            "--weights",
            "1,-1,2,0",
            "--p",
            "2,4",
        ])
        .unwrap();
        let lines: Vec<&str> = outcome.text.lines().collect();
        assert!(lines[3].starts_with("# note: M(a,b,p) is read as"));
        let rows: Vec<&&str> = lines.iter().filter(|l| l.starts_with("m-ratio")).collect();
        assert_eq!(rows.len(), 2);
        for row in rows {
            let cells: Vec<&str> = row.split(',').collect();
            assert_eq!(cells[8], "", "slack stays empty on data rows");
            assert_eq!(cells[9], "", "satisfied stays empty on data rows");
            assert!(!cells[13].is_empty(), "ratio column is filled");
        }
        assert!(outcome.summary.contains("m-ratio: N=4"));
    }

    #[test]
    fn sweep_empty_grid_yields_header_only_csv() {
        let outcome =
            run_args(&["radbound", "sweep", "--weights", "1,-1", "--p", ""]).unwrap();
        let lines: Vec<&str> = outcome.text.lines().collect();
        assert_eq!(lines.len(), 4, "comments plus header");
        assert!(lines[3].starts_with("statement_id,"));
    }

    #[test]
    fn weight_files_and_inline_lists_agree() {
        let dir = std::env::temp_dir().join(format!("radbound-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("weights.txt");
        std::fs::write(&path, "# split pair\n1\n\n-1\n").unwrap();
        let from_file = run_args(&[
            "radbound",
            "verify-main",
            "--weights",
            path.to_str().unwrap(),
            "--p",
            "2",
        ])
        .unwrap();
        let inline =
            run_args(&["radbound", "verify-main", "--weights", "1,-1", "--p", "2"]).unwrap();
        let body = |text: &str| {
            serde_json::from_str::<serde_json::Value>(text).unwrap()["reports"].clone()
        };
        assert_eq!(body(&from_file.text), body(&inline.text));
        std::fs::remove_file(&path).unwrap();
        assert!(matches!(
            run_args(&["radbound", "verify-main", "--weights", "nope,1", "--p", "2"]),
            Err(CliError::Usage(_))
        ));
    }
}
