//! The verdict engine.
//!
//! Every hypothesis is evaluated into a [`Condition`] row carrying the witness
//! that decided it. Nothing here ever claims a solution exists: a failed row
//! only means the corresponding result does not apply.
//!
//! The corollary asks for *a divisor* `r` of `B` with `r^(t-1) ≢ 1 (mod t²)`.
//! The residues `r` with `r^(t-1) ≡ 1` form a subgroup of `(Z/t²)^×`, so every
//! divisor is trivial iff every prime divisor is; it therefore suffices to scan
//! the prime divisors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Factorization};
use crate::assumption::{self, Assumption};
use crate::bernoulli::{self, GoodPrimeBranch, GoodPrimeVerdict};
use crate::modgroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    CorollaryHolds,
    TheoremHolds,
    NotApplicable,
}

impl Conclusion {
    /// What the conclusion asserts about `X^t + Y^t = B Z^t`.
    pub fn statement(&self) -> &'static str {
        match self {
            Conclusion::CorollaryHolds => {
                "no solution in pairwise relatively prime nonzero integers X, Y, Z"
            }
            Conclusion::TheoremHolds => {
                "no solution in pairwise relatively prime nonzero integers X, Y, Z with t | Z"
            }
            Conclusion::NotApplicable => "hypotheses not satisfied; no claim is made",
        }
    }
}

impl std::fmt::Display for Conclusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Conclusion::CorollaryHolds => "CorollaryHolds",
            Conclusion::TheoremHolds => "TheoremHolds",
            Conclusion::NotApplicable => "NotApplicable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionLevel {
    Theorem,
    Corollary,
    /// Used by the corollary's proof but absent from its statement.
    CorollaryProof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub level: ConditionLevel,
    pub holds: bool,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisVerdict {
    pub t: i64,
    #[serde(with = "crate::serde_str")]
    pub b: BigInt,
    pub conditions: Vec<Condition>,
    pub conclusion: Conclusion,
    pub assumptions: Vec<Assumption>,
    pub good_prime_branch: Option<GoodPrimeBranch>,
}

impl HypothesisVerdict {
    pub fn first_failing(&self) -> Option<&Condition> {
        let failing = |level: &dyn Fn(ConditionLevel) -> bool| {
            self.conditions.iter().find(|c| !c.holds && level(c.level))
        };
        failing(&|l| l == ConditionLevel::Theorem).or_else(|| failing(&|_| true))
    }

    pub fn theorem_conditions_hold(&self) -> bool {
        self.conditions
            .iter()
            .filter(|c| c.level == ConditionLevel::Theorem)
            .all(|c| c.holds)
    }
}

/// Which conclusion the caller is asking about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EvaluationMode {
    /// Corollary, falling back to the theorem.
    #[default]
    Full,
    TheoremOnly,
    /// Corollary without the theorem-level fallback.
    CorollaryOnly,
}

fn row(name: impl Into<String>, level: ConditionLevel, holds: bool, evidence: impl Into<String>) -> Condition {
    Condition { name: name.into(), level, holds, evidence: evidence.into() }
}

/// The exponent as a valid prime `> 3`, if it is one.
fn valid_exponent(t: i64) -> Option<u64> {
    let tu = u64::try_from(t).ok()?;
    (tu > 3 && arith::is_prime_u(tu)).then_some(tu)
}

/// Looks up the good-prime verdict for `t`; `precomputed` must be for the same `t`.
fn good_prime(t: u64, precomputed: Option<&GoodPrimeVerdict>) -> Result<GoodPrimeVerdict, String> {
    match precomputed {
        Some(v) if v.t == t => Ok(v.clone()),
        _ => bernoulli::good_prime_check(t).map_err(|e| e.to_string()),
    }
}

struct Context {
    t: u64,
    b: BigInt,
    factorization: Factorization,
}

fn theorem_rows(
    t_raw: i64,
    b: &BigInt,
    precomputed: Option<&GoodPrimeVerdict>,
    out: &mut Vec<Condition>,
    assumptions: &mut Vec<Assumption>,
    branch: &mut Option<GoodPrimeBranch>,
) -> Option<Context> {
    use ConditionLevel::Theorem;
    let t = valid_exponent(t_raw);
    out.push(row(
        "t_prime_gt_3",
        Theorem,
        t.is_some(),
        match t {
            Some(_) => format!("t = {t_raw} is a prime > 3"),
            None => format!("t = {t_raw} is not an odd prime > 3"),
        },
    ));
    out.push(row(
        "b_nonzero",
        Theorem,
        !b.is_zero(),
        format!("B = {b}"),
    ));
    let t = t?;
    if b.is_zero() {
        return None;
    }
    let tb = BigInt::from(t);

    let g = b.gcd(&tb);
    out.push(row(
        "b_coprime_to_t",
        Theorem,
        g.is_one(),
        format!("gcd({b}, {t}) = {g}"),
    ));

    match good_prime(t, precomputed) {
        Ok(v) => {
            *branch = Some(v.branch);
            let evidence = match &v.report.scan_mod_t_cubed {
                Some(scan) if v.branch != GoodPrimeBranch::IotaZero => format!(
                    "branch {}; irregular k = {:?}; {}; min residue index n with B_(2nt) mod t^3 = 0: {}",
                    v.branch,
                    v.report.irregular_pairs,
                    v.reason,
                    scan.iter()
                        .find(|(_, r)| *r == 0)
                        .map_or("none".to_string(), |(n, _)| n.to_string())
                ),
                _ => format!("branch {}; {}", v.branch, v.reason),
            };
            out.push(row("t_good_prime", Theorem, v.is_good, evidence));
            if v.is_good {
                assumptions.extend(v.assumptions.iter().cloned());
            }
        }
        Err(e) => out.push(row("t_good_prime", Theorem, false, e)),
    }

    let factorization = match arith::factorize(b) {
        Ok(f) => f,
        Err(e) => {
            out.push(row("minus_one_in_subgroup", Theorem, false, e.to_string()));
            return None;
        }
    };
    if factorization.factors.is_empty() {
        out.push(row(
            "minus_one_in_subgroup",
            Theorem,
            true,
            format!("B = {b} has no prime divisors"),
        ));
    }
    for l in factorization.primes() {
        let name = format!("minus_one_in_subgroup(l={l})");
        let cond = match modgroup::mult_order(l, t) {
            Ok(order) => row(
                name,
                Theorem,
                order % 2 == 0,
                format!(
                    "ord of {l} mod {t} is {order} ({}), so -1 mod {t} {} <{l} mod {t}>",
                    if order % 2 == 0 { "even" } else { "odd" },
                    if order % 2 == 0 { "is in" } else { "is not in" },
                ),
            ),
            Err(_) => row(name, Theorem, false, format!("l = {l} equals t; B is not prime to t")),
        };
        out.push(cond);
    }

    Some(Context { t, b: b.clone(), factorization })
}

fn corollary_rows(ctx: &Context, out: &mut Vec<Condition>) {
    use ConditionLevel::{Corollary, CorollaryProof};
    let Context { t, b, factorization } = ctx;
    let t = *t;
    let t2 = t * t;
    let tb = BigInt::from(t);

    let abs_b = b.abs();
    match arith::euler_phi(&abs_b) {
        Ok(phi) => {
            let g = phi.gcd(&tb);
            let bg = b.gcd(&tb);
            out.push(row(
                "b_phi_b_coprime_to_t",
                CorollaryProof,
                g.is_one() && bg.is_one(),
                format!("phi({abs_b}) = {phi}; gcd(B, {t}) = {bg}; gcd(phi(|B|), {t}) = {g}"),
            ));
        }
        Err(e) => out.push(row("b_phi_b_coprime_to_t", CorollaryProof, false, e.to_string())),
    }

    match (modgroup::fermat_residue(b, t), modgroup::fermat_residue(&BigInt::from(2), t)) {
        (Ok(rb), Ok(r2)) => out.push(row(
            "b_pow_ne_two_pow",
            Corollary,
            rb != r2,
            format!("B^{} = {rb} mod {t2}; 2^{} = {r2} mod {t2}", t - 1, t - 1),
        )),
        _ => out.push(row(
            "b_pow_ne_two_pow",
            Corollary,
            false,
            format!("{t} divides B; the congruence is undefined"),
        )),
    }

    let mut witness = None;
    let mut trivial = Vec::new();
    for r in factorization.primes() {
        match modgroup::fermat_residue(r, t) {
            Ok(res) if !res.is_one() => {
                witness = Some((r.clone(), res));
                break;
            }
            Ok(_) => trivial.push(r.to_string()),
            Err(_) => trivial.push(format!("{r} (= t)")),
        }
    }
    let cond = match witness {
        Some((r, res)) => row(
            "nontrivial_fermat_quotient_divisor",
            Corollary,
            true,
            format!("r = {r}: r^{} = {res} mod {t2}", t - 1),
        ),
        None if trivial.is_empty() => row(
            "nontrivial_fermat_quotient_divisor",
            Corollary,
            false,
            format!("B = {b} has no divisor other than 1 and -1, both with r^{} = 1 mod {t2}", t - 1),
        ),
        None => row(
            "nontrivial_fermat_quotient_divisor",
            Corollary,
            false,
            format!(
                "every prime divisor r of B has r^{} = 1 mod {t2}: [{}]",
                t - 1,
                trivial.join(", ")
            ),
        ),
    };
    out.push(cond);
}

pub fn evaluate_theorem(t: i64, b: &BigInt) -> HypothesisVerdict {
    evaluate(t, b, EvaluationMode::TheoremOnly, None)
}

pub fn evaluate_corollary(t: i64, b: &BigInt) -> HypothesisVerdict {
    evaluate(t, b, EvaluationMode::Full, None)
}

/// Evaluates the hypotheses of the requested level.
///
/// `precomputed` lets batch callers share one good-prime verdict per `t`; it
/// is ignored if it belongs to a different exponent.
pub fn evaluate(
    t: i64,
    b: &BigInt,
    mode: EvaluationMode,
    precomputed: Option<&GoodPrimeVerdict>,
) -> HypothesisVerdict {
    let mut conditions = Vec::new();
    let mut assumptions = Vec::new();
    let mut branch = None;
    let ctx = theorem_rows(t, b, precomputed, &mut conditions, &mut assumptions, &mut branch);
    if let (Some(ctx), false) = (&ctx, mode == EvaluationMode::TheoremOnly) {
        corollary_rows(ctx, &mut conditions);
    }

    let theorem_ok = ctx.is_some()
        && conditions
            .iter()
            .filter(|c| c.level == ConditionLevel::Theorem)
            .all(|c| c.holds);
    let all_ok = theorem_ok && conditions.iter().all(|c| c.holds);
    let conclusion = match mode {
        EvaluationMode::TheoremOnly if theorem_ok => Conclusion::TheoremHolds,
        EvaluationMode::Full | EvaluationMode::CorollaryOnly if all_ok => Conclusion::CorollaryHolds,
        EvaluationMode::Full if theorem_ok => Conclusion::TheoremHolds,
        _ => Conclusion::NotApplicable,
    };
    if conclusion == Conclusion::NotApplicable {
        assumptions.clear();
    }
    if conclusion == Conclusion::CorollaryHolds {
        assumptions.push(assumption::bennett_theorem());
    }
    HypothesisVerdict {
        t,
        b: b.clone(),
        conditions,
        conclusion,
        assumptions,
        good_prime_branch: branch,
    }
}

/// Smallest `l | B` that decides the `-1 ∈ <l>` condition negatively, if any.
pub fn failing_subgroup_prime(v: &HypothesisVerdict) -> Option<u64> {
    v.conditions
        .iter()
        .filter(|c| !c.holds)
        .find_map(|c| c.name.strip_prefix("minus_one_in_subgroup(l=")?.strip_suffix(')')?.parse::<BigInt>().ok())
        .and_then(|l| l.to_u64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn cond<'a>(v: &'a HypothesisVerdict, name: &str) -> &'a Condition {
        v.conditions.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no row {name}"))
    }

    #[test]
    fn theorem_examples() {
        let v = evaluate_theorem(5, &big(2));
        assert_eq!(v.conclusion, Conclusion::TheoremHolds);
        assert!(cond(&v, "minus_one_in_subgroup(l=2)").holds);
        assert!(!v.conditions.iter().any(|c| c.level != ConditionLevel::Theorem));

        let v = evaluate_theorem(5, &big(33));
        assert_eq!(v.conclusion, Conclusion::NotApplicable);
        let failing = v.first_failing().unwrap();
        assert_eq!(failing.name, "minus_one_in_subgroup(l=11)");
        assert!(failing.evidence.contains("is 1"));
        assert_eq!(failing_subgroup_prime(&v), Some(11));

        let v = evaluate_theorem(4, &big(3));
        assert_eq!(v.conclusion, Conclusion::NotApplicable);
        assert_eq!(v.first_failing().unwrap().name, "t_prime_gt_3");
    }

    #[test]
    fn corollary_examples() {
        let v = evaluate_corollary(5, &big(3));
        assert_eq!(v.conclusion, Conclusion::CorollaryHolds);
        assert!(cond(&v, "b_pow_ne_two_pow").evidence.contains("= 6 mod 25"));
        assert!(cond(&v, "b_phi_b_coprime_to_t").evidence.contains("phi(3) = 2"));
        assert!(v.assumptions.iter().any(|a| a.id == "bennett-4.1"));

        let v = evaluate_corollary(5, &big(2));
        assert_eq!(v.conclusion, Conclusion::TheoremHolds);
        let f = v.first_failing().unwrap();
        assert_eq!(f.name, "b_pow_ne_two_pow");
        assert!(v.assumptions.iter().all(|a| a.id != "bennett-4.1"));

        let v = evaluate_corollary(5, &big(7));
        assert_eq!(v.conclusion, Conclusion::TheoremHolds);
        let f = v.first_failing().unwrap();
        assert_eq!(f.name, "nontrivial_fermat_quotient_divisor");
        assert!(f.evidence.contains("[7]"));
    }

    #[test]
    fn corollary_only_mode_has_no_fallback() {
        let v = evaluate(5, &big(2), EvaluationMode::CorollaryOnly, None);
        assert_eq!(v.conclusion, Conclusion::NotApplicable);
        let v = evaluate(5, &big(3), EvaluationMode::CorollaryOnly, None);
        assert_eq!(v.conclusion, Conclusion::CorollaryHolds);
    }

    #[test]
    fn degenerate_inputs() {
        let v = evaluate_corollary(5, &big(0));
        assert_eq!(v.conclusion, Conclusion::NotApplicable);
        assert_eq!(v.first_failing().unwrap().name, "b_nonzero");

        let v = evaluate_corollary(5, &big(10));
        assert_eq!(v.conclusion, Conclusion::NotApplicable);
        assert_eq!(v.first_failing().unwrap().name, "b_coprime_to_t");
        assert!(!cond(&v, "minus_one_in_subgroup(l=5)").holds);

        let v = evaluate_corollary(-7, &big(3));
        assert_eq!(v.conclusion, Conclusion::NotApplicable);
        let v = evaluate_corollary(9, &big(3));
        assert_eq!(v.conclusion, Conclusion::NotApplicable);
        let v = evaluate_corollary(3, &big(2));
        assert_eq!(v.conclusion, Conclusion::NotApplicable);

        // B = 1: the theorem applies, the corollary has no divisor witness.
        let v = evaluate_corollary(7, &big(1));
        assert_eq!(v.conclusion, Conclusion::TheoremHolds);
        assert_eq!(v.first_failing().unwrap().name, "nontrivial_fermat_quotient_divisor");
    }

    #[test]
    fn sign_of_b_is_irrelevant() {
        for b in [2i64, 3, 7, 33, 12, 1] {
            for t in [5i64, 7, 11] {
                let pos = evaluate_corollary(t, &big(b));
                let neg = evaluate_corollary(t, &big(-b));
                assert_eq!(pos.conclusion, neg.conclusion, "t={t} b={b}");
            }
        }
    }

    #[test]
    fn phi_condition_follows_from_theorem_conditions() {
        // t | phi(|B|) needs t | B or a prime l ≡ 1 mod t dividing B, and such
        // an l has odd order 1; so the row can only fail alongside a theorem row.
        let v = evaluate_corollary(5, &big(45));
        assert!(!cond(&v, "b_phi_b_coprime_to_t").holds);
        let v = evaluate_corollary(5, &big(11));
        assert!(!cond(&v, "b_phi_b_coprime_to_t").holds);
        assert_eq!(v.conclusion, Conclusion::NotApplicable);
        for t in [5i64, 7, 11] {
            for b in 1..=400i64 {
                let v = evaluate_corollary(t, &big(b));
                if v.theorem_conditions_hold() {
                    assert!(cond(&v, "b_phi_b_coprime_to_t").holds, "t={t} b={b}");
                }
            }
        }
    }

    #[test]
    fn monotone_and_deterministic() {
        for t in [5i64, 7, 11, 13] {
            for b in 1..=120i64 {
                let full = evaluate_corollary(t, &big(b));
                let thm = evaluate_theorem(t, &big(b));
                if full.conclusion == Conclusion::CorollaryHolds {
                    assert_eq!(thm.conclusion, Conclusion::TheoremHolds);
                }
                assert_eq!(
                    full.conclusion != Conclusion::NotApplicable,
                    thm.conclusion == Conclusion::TheoremHolds
                );
                assert_eq!(full, evaluate_corollary(t, &big(b)));
            }
        }
    }
}
