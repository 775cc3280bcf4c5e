//! Certificates, batch scans, and the identity self-test.
//!
//! Certificate and scan-record fields are documented in `docs/schema.md`.
//! Scan records carry no timestamps so that output is byte-identical across
//! runs and thread counts.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::assumption::Assumption;
use crate::bernoulli::{self, GoodPrimeBranch, GoodPrimeOptions, GoodPrimeVerdict, IrregularityReport};
use crate::cyclotomic;
use crate::error::{domain, Result};
use crate::hypotheses::{self, Conclusion, EvaluationMode, HypothesisVerdict};
use crate::modgroup;
use crate::search::{self, ConsistencyStatus, SolutionTriple};

pub const SCHEMA_VERSION: &str = "1";

/// Exit code for a verdict.
pub fn exit_code(conclusion: Conclusion) -> i32 {
    match conclusion {
        Conclusion::CorollaryHolds => 0,
        Conclusion::TheoremHolds => 10,
        Conclusion::NotApplicable => 20,
    }
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toolchain {
    pub package: String,
    pub version: String,
    pub rustc: String,
}

impl Toolchain {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rustc: env!("FLTCERT_RUSTC_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateInputs {
    pub t: i64,
    #[serde(with = "crate::serde_str")]
    pub b: BigInt,
    pub bound: Option<i64>,
    pub mode: EvaluationMode,
    pub full_scan: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchEvidence {
    pub bound: i64,
    pub solutions: Vec<SolutionTriple>,
    pub counterexamples: Vec<SolutionTriple>,
    pub status: ConsistencyStatus,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: String,
    pub timestamp: String,
    pub inputs: CertificateInputs,
    pub verdict: HypothesisVerdict,
    /// Human-readable form of the conclusion.
    pub statement: String,
    pub irregularity: Option<IrregularityReport>,
    pub search_evidence: Option<SearchEvidence>,
    pub assumptions: Vec<Assumption>,
    pub toolchain: Toolchain,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CertifyOptions {
    pub bound: Option<i64>,
    pub mode: EvaluationMode,
    pub full_scan: bool,
}

impl Certificate {
    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn parse(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Exit code: the verdict's, unless the search contradicted it.
    pub fn exit_code(&self) -> i32 {
        match &self.search_evidence {
            Some(e) if e.status == ConsistencyStatus::Contradiction => EXIT_INTERNAL,
            _ => exit_code(self.verdict.conclusion),
        }
    }

    pub fn summary(&self) -> String {
        let v = &self.verdict;
        let mut out = format!("X^{t} + Y^{t} = {b}*Z^{t}\n", t = v.t, b = v.b);
        for c in &v.conditions {
            out += &format!(
                "  {:<6} {:<40} {}\n",
                if c.holds { "[ok]" } else { "[FAIL]" },
                c.name,
                c.evidence
            );
        }
        out += &format!("conclusion: {} ({})\n", v.conclusion, self.statement);
        if let Some(e) = &self.search_evidence {
            out += &format!("search: {} - {}\n", e.status, e.note);
            if e.bound > 0 {
                out += "  (bounded search is evidence, not proof)\n";
            }
        }
        for a in &self.assumptions {
            out += &format!("assumes [{}]: {} ({})\n", a.id, a.statement, a.source);
        }
        out
    }
}

/// Evaluates `(t, B)` and packages the result.
pub fn certify(t: i64, b: &BigInt, opts: CertifyOptions) -> Result<Certificate> {
    let good = match u64::try_from(t) {
        Ok(tu) if tu > 3 && arith::is_prime_u(tu) => Some(bernoulli::good_prime_check_with(
            tu,
            GoodPrimeOptions { full_scan: opts.full_scan },
        )?),
        _ => None,
    };
    let verdict = hypotheses::evaluate(t, b, opts.mode, good.as_ref());

    let search_evidence = match (opts.bound, &good) {
        (Some(bound), Some(_)) if !num_traits::Zero::is_zero(b) => {
            let r = search::consistency_check_with(&verdict, bound)?;
            Some(SearchEvidence {
                bound,
                solutions: r.solutions,
                counterexamples: r.counterexamples,
                status: r.status,
                note: r.note,
            })
        }
        (Some(bound), _) if bound < 1 => return Err(domain!("bound must be >= 1")),
        _ => None,
    };

    Ok(Certificate {
        schema_version: SCHEMA_VERSION.into(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        inputs: CertificateInputs { t, b: b.clone(), bound: opts.bound, mode: opts.mode, full_scan: opts.full_scan },
        statement: verdict.conclusion.statement().into(),
        assumptions: verdict.assumptions.clone(),
        verdict,
        irregularity: good.map(|g| g.report),
        search_evidence,
        toolchain: Toolchain::current(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub t: i64,
    #[serde(with = "crate::serde_str")]
    pub b: BigInt,
    pub conclusion: Conclusion,
    pub first_failing_condition: Option<String>,
    pub failing_evidence: Option<String>,
    pub good_prime_branch: Option<GoodPrimeBranch>,
    pub assumptions: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanFormat {
    JsonLines,
    Csv,
}

fn run_with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| domain!("thread pool: {e}"))?;
            Ok(pool.install(f))
        }
    }
}

/// One record per `(t, B)`, `t`-major. `threads = None` uses the global pool.
pub fn scan(ts: &[i64], bs: &[BigInt], threads: Option<usize>) -> Result<Vec<ScanRecord>> {
    if ts.is_empty() || bs.is_empty() {
        return Err(domain!("scan ranges must be nonempty"));
    }
    run_with_threads(threads, || {
        let goods: Vec<Option<GoodPrimeVerdict>> = ts
            .par_iter()
            .map(|&t| {
                let tu = u64::try_from(t).ok().filter(|&tu| tu > 3 && arith::is_prime_u(tu))?;
                bernoulli::good_prime_check(tu).ok()
            })
            .collect();
        let jobs: Vec<(usize, &BigInt)> = (0..ts.len()).flat_map(|i| bs.iter().map(move |b| (i, b))).collect();
        jobs.par_iter()
            .map(|&(i, b)| {
                let v = hypotheses::evaluate(ts[i], b, EvaluationMode::Full, goods[i].as_ref());
                let failing = v.first_failing();
                ScanRecord {
                    t: v.t,
                    b: v.b.clone(),
                    conclusion: v.conclusion,
                    first_failing_condition: failing.map(|c| c.name.clone()),
                    failing_evidence: failing.map(|c| c.evidence.clone()),
                    good_prime_branch: v.good_prime_branch,
                    assumptions: goods[i]
                        .iter()
                        .flat_map(|g| &g.assumptions)
                        .chain(v.assumptions.iter().filter(|a| a.id != "vandiver-range"))
                        .map(|a| format!("{}: {}", a.id, a.source))
                        .collect(),
                }
            })
            .collect()
    })
}

/// Writes scan records; output depends only on `records`.
pub fn write_scan<W: Write>(records: &[ScanRecord], format: ScanFormat, out: W) -> io::Result<()> {
    match format {
        ScanFormat::JsonLines => {
            let mut out = io::BufWriter::new(out);
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
        ScanFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "t",
                "B",
                "conclusion",
                "first_failing_condition",
                "failing_evidence",
                "good_prime_branch",
                "assumptions",
            ])?;
            for r in records {
                w.write_record([
                    r.t.to_string(),
                    r.b.to_string(),
                    r.conclusion.to_string(),
                    r.first_failing_condition.clone().unwrap_or_default(),
                    r.failing_evidence.clone().unwrap_or_default(),
                    r.good_prime_branch.map(|b| b.to_string()).unwrap_or_default(),
                    r.assumptions.join("; "),
                ])?;
            }
            w.flush()
        }
    }
}

pub fn render_scan(records: &[ScanRecord], format: ScanFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    write_scan(records, format, &mut buf).expect("writing to memory");
    buf
}

/// Text rendering of a good-prime verdict.
pub fn render_bernoulli(v: &GoodPrimeVerdict, exact_agreement: Option<bool>) -> String {
    let r = &v.report;
    let pairs: Vec<String> = r.irregular_pairs.iter().map(|k| format!("({}, {k})", r.t)).collect();
    let mut out = format!("t = {}\n", r.t);
    out += &format!("irregular pairs: [{}], ι = {}\n", pairs.join(", "), r.iota);
    if v.is_good {
        out += &format!("ι = {}; good prime (branch {})\n", r.iota, v.branch);
    } else {
        out += &format!("ι = {}; not a good prime (branch {}): {}\n", r.iota, v.branch, v.reason);
    }
    if let Some(scan) = &r.scan_mod_t_cubed {
        out += &format!("B_(2nt) mod t^3 for n = 1..{}:\n", scan.len());
        for (n, res) in scan {
            out += &format!("  n = {n:>3}  B_{:<6} = {res}\n", 2 * n * r.t);
        }
    }
    match exact_agreement {
        Some(true) => out += "exact-rational cross-check: agrees\n",
        Some(false) => out += "exact-rational cross-check: DISAGREES\n",
        None => out += "exact-rational cross-check: skipped (beyond exact cap)\n",
    }
    for a in &v.assumptions {
        out += &format!("assumes [{}]: {} ({})\n", a.id, a.statement, a.source);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub identity: String,
    pub t: u64,
    pub cases: usize,
    pub passed: bool,
    pub detail: String,
}

pub const SELFTEST_SEED: u64 = 0xc1c1_0701;

/// Random coprime `(x, y)` with `|x|, |y| <= 100` and `x + y ≠ 0`.
fn random_coprime_pair(rng: &mut ChaCha8Rng) -> (i64, i64) {
    loop {
        let x = rng.gen_range(-100i64..=100);
        let y = rng.gen_range(-100i64..=100);
        if x.gcd(&y) == 1 && x + y != 0 {
            return (x, y);
        }
    }
}

/// Random coprime `(x, y)` with `t | x + y ≠ 0`.
fn random_alpha_pair(t: i64, rng: &mut ChaCha8Rng) -> (i64, i64) {
    loop {
        let x = rng.gen_range(-100i64..=100);
        let m = rng.gen_range(-20i64..=20);
        let y = m * t - x;
        if m != 0 && x.gcd(&y) == 1 {
            return (x, y);
        }
    }
}

/// Runs the identity suites for every prime `5 <= t <= t_max`.
pub fn selftest(t_max: u64, seed: u64) -> Result<Vec<IdentityCheck>> {
    let ts: Vec<u64> = arith::primes_up_to(t_max).into_iter().filter(|&t| t >= 5).collect();
    if ts.is_empty() {
        return Err(domain!("no prime t with 5 <= t <= {t_max}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &t in &ts {
        out.push(IdentityCheck {
            name: "t_over_lambda_real_unit".into(),
            identity: "t / lambda^((t-1)/2) is a real unit of Z[zeta], lambda = (1-zeta)(1-zeta^-1)".into(),
            t,
            cases: 1,
            passed: cyclotomic::verify_t_over_lambda_unit(t)?,
            detail: String::new(),
        });

        let pairs = cyclotomic::delta_pairs(t);
        let mut bad = Vec::new();
        for &(a, b) in &pairs {
            if !cyclotomic::verify_delta_unit(t, a, b)? {
                bad.push(format!("({a}, {b})"));
            }
        }
        out.push(IdentityCheck {
            name: "delta_prime_real_unit".into(),
            identity: "lambda_a^-1 - lambda_b^-1 = (zeta^-b - zeta^-a)(zeta^(a+b) - 1)/(lambda_a lambda_b) \
                       = delta'/lambda with delta' a real unit"
                .into(),
            t,
            cases: pairs.len(),
            passed: bad.is_empty(),
            detail: if bad.is_empty() { String::new() } else { format!("failed at {}", bad.join(" ")) },
        });

        let ls: Vec<u64> = arith::primes_up_to(60)
            .into_iter()
            .filter(|&l| l != t && modgroup::contains_minus_one(&BigInt::from(l), t).unwrap_or(false))
            .collect();
        let mut bad = Vec::new();
        let mut cases = 0;
        for &l in &ls {
            for _ in 0..500 {
                let (x, y) = random_coprime_pair(&mut rng);
                cases += 1;
                if !cyclotomic::cofactor_coprime_check(t, l, x, y)? {
                    bad.push(format!("l={l} x={x} y={y}"));
                }
            }
        }
        out.push(IdentityCheck {
            name: "cofactor_coprime".into(),
            identity: "l does not divide (x^t + y^t)/(x + y) when -1 is in <l mod t>".into(),
            t,
            cases,
            passed: bad.is_empty(),
            detail: format!("l in {ls:?}{}", if bad.is_empty() { String::new() } else { format!("; failed at {}", bad.join(" ")) }),
        });

        let mut bad = Vec::new();
        for _ in 0..200 {
            let (x, y) = random_alpha_pair(t as i64, &mut rng);
            if !cyclotomic::alpha_congruence_check(t, x, y)? {
                bad.push(format!("x={x} y={y}"));
            }
        }
        out.push(IdentityCheck {
            name: "alpha_congruence".into(),
            identity: "alpha = (x + zeta y)/(1 - zeta) is integral, alpha = -y and conj(alpha) = alpha mod (1-zeta)^2"
                .into(),
            t,
            cases: 200,
            passed: bad.is_empty(),
            detail: if bad.is_empty() { String::new() } else { format!("failed at {}", bad.join(" ")) },
        });
    }
    if ts.contains(&5) {
        let cof = cyclotomic::cyclotomic_cofactor(5, 2, 3)?;
        out.push(IdentityCheck {
            name: "cofactor_hypothesis_necessary".into(),
            identity: "without -1 in <l mod t> the claim fails: t=5, l=11, (2^5+3^5)/5 = 55".into(),
            t: 5,
            cases: 1,
            passed: cof == BigInt::from(55) && !modgroup::contains_minus_one(&BigInt::from(11), 5)?,
            detail: format!("cofactor = {cof}"),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn certificate_round_trip() {
        let c = certify(5, &big(3), CertifyOptions { bound: Some(20), ..Default::default() }).unwrap();
        assert_eq!(c.verdict.conclusion, Conclusion::CorollaryHolds);
        assert_eq!(c.exit_code(), 0);
        assert_eq!(c.schema_version, "1");
        assert_eq!(Certificate::parse(&c.render()).unwrap(), c);
        assert!(c.summary().contains("(no solution in pairwise relatively prime nonzero integers X, Y, Z)"));
    }

    #[test]
    fn certify_exit_codes() {
        let c = certify(5, &big(33), CertifyOptions::default()).unwrap();
        assert_eq!(c.exit_code(), 20);
        assert_eq!(c.verdict.first_failing().unwrap().name, "minus_one_in_subgroup(l=11)");
        let c = certify(4, &big(3), CertifyOptions::default()).unwrap();
        assert_eq!(c.exit_code(), 20);
        assert!(c.irregularity.is_none());
        let c = certify(5, &big(2), CertifyOptions::default()).unwrap();
        assert_eq!(c.exit_code(), 10);
        let c = certify(5, &big(2), CertifyOptions { mode: EvaluationMode::TheoremOnly, ..Default::default() }).unwrap();
        assert_eq!(c.exit_code(), 10);
        assert!(certify(5, &big(2), CertifyOptions { bound: Some(0), ..Default::default() }).is_err());
    }

    #[test]
    fn scan_counts_and_order() {
        let bs: Vec<BigInt> = (2..=20).map(big).collect();
        let recs = scan(&[5, 7], &bs, None).unwrap();
        assert_eq!(recs.len(), 38);
        assert!(recs.windows(2).all(|w| (w[0].t, &w[0].b) < (w[1].t, &w[1].b)));
        let r = recs.iter().find(|r| r.t == 5 && r.b == big(7)).unwrap();
        assert_eq!(r.conclusion, Conclusion::TheoremHolds);
        assert_eq!(r.first_failing_condition.as_deref(), Some("nontrivial_fermat_quotient_divisor"));
        assert!(scan(&[5], &[], None).is_err());
    }

    #[test]
    fn csv_and_jsonl_render() {
        let recs = scan(&[5], &[big(3), big(33)], Some(1)).unwrap();
        let csv = String::from_utf8(render_scan(&recs, ScanFormat::Csv)).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("t,B,conclusion,"));
        let jl = String::from_utf8(render_scan(&recs, ScanFormat::JsonLines)).unwrap();
        let parsed: Vec<ScanRecord> = jl.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(parsed, recs);
    }

    #[test]
    fn bernoulli_rendering() {
        let v = bernoulli::good_prime_check(7).unwrap();
        let text = render_bernoulli(&v, Some(true));
        assert!(text.contains("ι = 0; good prime (branch IotaZero)"));
    }

    #[test]
    fn selftest_small() {
        let checks = selftest(7, SELFTEST_SEED).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        assert!(selftest(4, SELFTEST_SEED).is_err());
    }
}
