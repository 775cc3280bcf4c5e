use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use fltcert::bernoulli::{self, GoodPrimeOptions, DEFAULT_EXACT_CAP};
use fltcert::hypotheses::EvaluationMode;
use fltcert::report::{self, CertifyOptions, ScanFormat, EXIT_INTERNAL, EXIT_IO, EXIT_USAGE};
use fltcert::search;

#[derive(Parser)]
#[command(name = "flt-cert", version, about = "Hypothesis checker for X^t + Y^t = B*Z^t")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one (t, B) and print a JSON certificate.
    Certify(CertifyArgs),
    /// Evaluate a grid of (t, B) and write one record per pair.
    Scan(ScanArgs),
    /// Bounded search for coprime solutions.
    Search(SearchArgs),
    /// Irregular pairs and the good-prime verdict for t.
    Bernoulli(BernoulliArgs),
    /// Re-verify the cyclotomic identities.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    t: i64,
    #[arg(long = "B", allow_hyphen_values = true)]
    b: BigInt,
    /// Also search the box max(|X|, |Y|) <= BOUND.
    #[arg(long)]
    bound: Option<i64>,
    #[arg(long, conflicts_with = "theorem_only")]
    corollary_only: bool,
    #[arg(long)]
    theorem_only: bool,
    /// Compute the B_(2nt) scan even for regular t.
    #[arg(long)]
    full_scan: bool,
    /// Print a readable summary instead of JSON.
    #[arg(long)]
    summary: bool,
    /// Write the certificate here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    JsonLines,
    Csv,
}

#[derive(Args)]
struct ScanArgs {
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_unless_present = "t_range")]
    t: Vec<i64>,
    /// Inclusive range LO..HI of exponents.
    #[arg(long, conflicts_with = "t")]
    t_range: Option<String>,
    /// Comma-separated values of B.
    #[arg(long = "B", value_delimiter = ',', allow_hyphen_values = true, required_unless_present = "b_range")]
    b: Vec<BigInt>,
    /// Inclusive range LO..HI of B.
    #[arg(long = "B-range", conflicts_with = "b", allow_hyphen_values = true)]
    b_range: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json-lines")]
    format: FormatArg,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    t: u64,
    #[arg(long = "B", allow_hyphen_values = true)]
    b: BigInt,
    #[arg(long)]
    bound: i64,
    #[arg(long)]
    require_t_divides_z: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BernoulliArgs {
    #[arg(long)]
    t: u64,
    /// Largest index for the exact-rational cross-check.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    exact_cap: u64,
    #[arg(long)]
    full_scan: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 13)]
    t_max: u64,
    #[arg(long, default_value_t = report::SELFTEST_SEED)]
    seed: u64,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Io(anyhow::Error),
}

impl From<fltcert::Error> for Failure {
    fn from(e: fltcert::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn io_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

/// Parses an inclusive `LO..HI` range; an inverted range is empty.
fn parse_range(s: &str) -> Result<Vec<BigInt>, Failure> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| Failure::Usage(anyhow!("range `{s}` must look like LO..HI")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<BigInt>()
            .map_err(|_| Failure::Usage(anyhow!("bad range endpoint `{v}`")))
    };
    let (mut cur, hi) = (parse(lo)?, parse(hi)?);
    let mut out = Vec::new();
    while cur <= hi {
        out.push(cur.clone());
        cur += 1u32;
    }
    Ok(out)
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot write {}", p.display())).map_err(io_err)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn certify(a: CertifyArgs) -> Result<i32, Failure> {
    let mode = match (a.corollary_only, a.theorem_only) {
        (true, _) => EvaluationMode::CorollaryOnly,
        (_, true) => EvaluationMode::TheoremOnly,
        _ => EvaluationMode::Full,
    };
    let cert = report::certify(a.t, &a.b, CertifyOptions { bound: a.bound, mode, full_scan: a.full_scan })?;
    let text = if a.summary { cert.summary() } else { cert.render() + "\n" };
    let mut out = open_output(&a.output)?;
    out.write_all(text.as_bytes()).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(cert.exit_code())
}

fn scan(a: ScanArgs) -> Result<i32, Failure> {
    let ts = match &a.t_range {
        Some(r) => parse_range(r)?
            .iter()
            .map(|t| i64::try_from(t).map_err(|_| Failure::Usage(anyhow!("t = {t} out of range"))))
            .collect::<Result<_, _>>()?,
        None => a.t,
    };
    let bs = match &a.b_range {
        Some(r) => parse_range(r)?,
        None => a.b,
    };
    let records = report::scan(&ts, &bs, None)?;
    let format = match a.format {
        FormatArg::JsonLines => ScanFormat::JsonLines,
        FormatArg::Csv => ScanFormat::Csv,
    };
    let out = open_output(&a.output)?;
    report::write_scan(&records, format, out).map_err(io_err)?;
    eprintln!("{} records", records.len());
    Ok(0)
}

fn run_search(a: SearchArgs) -> Result<i32, Failure> {
    let found = search::find_solutions(a.t, &a.b, a.bound, a.require_t_divides_z)?;
    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &found).map_err(io_err)?;
        writeln!(out).map_err(io_err)?;
    } else {
        for s in &found {
            writeln!(out, "{s}{}", if s.t_divides_z { "  t | Z" } else { "" }).map_err(io_err)?;
        }
        writeln!(out, "{} solution(s) with max(|X|, |Y|) <= {}", found.len(), a.bound).map_err(io_err)?;
    }
    Ok(0)
}

fn run_bernoulli(a: BernoulliArgs) -> Result<i32, Failure> {
    let verdict = bernoulli::good_prime_check_with(a.t, GoodPrimeOptions { full_scan: a.full_scan })?;
    let agreement = bernoulli::cross_check_exact(a.t, a.exact_cap)?;
    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &verdict).map_err(io_err)?;
        writeln!(out).map_err(io_err)?;
    } else {
        out.write_all(report::render_bernoulli(&verdict, agreement).as_bytes()).map_err(io_err)?;
    }
    Ok(if agreement == Some(false) { EXIT_INTERNAL } else { 0 })
}

fn selftest(a: SelftestArgs) -> Result<i32, Failure> {
    let checks = report::selftest(a.t_max, a.seed)?;
    let mut out = io::stdout().lock();
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        writeln!(
            out,
            "{} t={:<3} {:<30} cases={:<5} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.t,
            c.name,
            c.cases,
            c.identity
        )
        .map_err(io_err)?;
        if !c.detail.is_empty() {
            writeln!(out, "      {}", c.detail).map_err(io_err)?;
        }
    }
    writeln!(out, "{}/{} checks passed", checks.iter().filter(|c| c.passed).count(), checks.len()).map_err(io_err)?;
    Ok(if all { 0 } else { EXIT_INTERNAL })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("FLT_CERT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(anyhow!("FLT_CERT_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.cmd {
        Command::Certify(a) => certify(a),
        Command::Scan(a) => scan(a),
        Command::Search(a) => run_search(a),
        Command::Bernoulli(a) => run_bernoulli(a),
        Command::Selftest(a) => selftest(a),
    });
    let code = match result {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            eprintln!("I/O error: {e:#}");
            EXIT_IO
        }
    };
    ExitCode::from(code as u8)
}
