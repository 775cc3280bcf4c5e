//! Bounded exhaustive search for solutions of `X^t + Y^t = B·Z^t`.
//!
//! The box is `max(|X|, |Y|) <= H`; `Z` is determined by the pair, so the
//! search is quadratic in `H`. Results say nothing outside the box.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, integer_root};
use crate::bernoulli::GoodPrimeVerdict;
use crate::error::{domain, Result};
use crate::hypotheses::{self, Conclusion, EvaluationMode, HypothesisVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SolutionTriple {
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub t_divides_z: bool,
}

impl SolutionTriple {
    /// Re-checks the equation and coprimality exactly.
    pub fn verify(&self, t: u64, b: &BigInt) -> bool {
        let p = |v: i64| num_traits::pow(BigInt::from(v), t as usize);
        let (x, y, z) = (self.x, self.y, self.z);
        x != 0
            && y != 0
            && z != 0
            && x.gcd(&y) == 1
            && x.gcd(&z) == 1
            && y.gcd(&z) == 1
            && p(x) + p(y) == b * p(z)
            && self.t_divides_z == (z % t as i64 == 0)
    }

    fn sort_key(&self) -> (u64, u64, bool, bool) {
        (self.x.unsigned_abs(), self.y.unsigned_abs(), self.x < 0, self.y < 0)
    }
}

impl std::fmt::Display for SolutionTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

fn check_search_inputs(t: u64, b: &BigInt, bound: i64) -> Result<()> {
    if t < 5 || !arith::is_prime_u(t) {
        return Err(domain!("search needs a prime t >= 5, got {t}"));
    }
    if b.is_zero() {
        return Err(domain!("B must be nonzero"));
    }
    if bound < 1 {
        return Err(domain!("search bound must be >= 1, got {bound}"));
    }
    Ok(())
}

/// All pairwise coprime nonzero solutions with `max(|X|, |Y|) <= bound`.
///
/// Each solution is reported once, normalized to `Z > 0`, in order of
/// `(|X|, |Y|)` with positive signs first.
pub fn find_solutions(t: u64, b: &BigInt, bound: i64, only_t_divides_z: bool) -> Result<Vec<SolutionTriple>> {
    check_search_inputs(t, b, bound)?;
    let powers: Vec<BigInt> = (0..=bound)
        .map(|v| num_traits::pow(BigInt::from(v), t as usize))
        .collect();
    let signed_pow = |v: i64| {
        let p = &powers[v.unsigned_abs() as usize];
        if v < 0 { -p } else { p.clone() }
    };
    let t_i = t as i64;

    let mut found: Vec<SolutionTriple> = (-bound..=bound)
        .into_par_iter()
        .filter(|&x| x != 0)
        .flat_map_iter(|x| {
            let px = signed_pow(x);
            let mut out = Vec::new();
            for y in (-bound..=bound).filter(|&y| y != 0 && x.gcd(&y) == 1) {
                let (q, r) = (&px + signed_pow(y)).div_rem(b);
                if !r.is_zero() || !q.is_positive() {
                    // Z > 0 after normalization needs the quotient positive.
                    continue;
                }
                let Some(z) = integer_root(&q, t as u32).and_then(|z| z.to_i64()) else {
                    continue;
                };
                if x.gcd(&z) != 1 || y.gcd(&z) != 1 {
                    continue;
                }
                let t_divides_z = z % t_i == 0;
                if only_t_divides_z && !t_divides_z {
                    continue;
                }
                out.push(SolutionTriple { x, y, z, t_divides_z });
            }
            out
        })
        .collect();
    found.sort_by_key(SolutionTriple::sort_key);
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConsistencyStatus {
    Pass,
    Contradiction,
}

impl std::fmt::Display for ConsistencyStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConsistencyStatus::Pass => "PASS",
            ConsistencyStatus::Contradiction => "CONTRADICTION",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub t: u64,
    #[serde(with = "crate::serde_str")]
    pub b: BigInt,
    pub bound: i64,
    pub conclusion: Conclusion,
    /// Every solution in the box.
    pub solutions: Vec<SolutionTriple>,
    /// Solutions the verdict says cannot exist.
    pub counterexamples: Vec<SolutionTriple>,
    pub status: ConsistencyStatus,
    pub note: String,
}

/// Runs the verdict engine and the box search, and checks they agree.
pub fn consistency_check(t: u64, b: &BigInt, bound: i64) -> Result<ConsistencyReport> {
    check_search_inputs(t, b, bound)?;
    let verdict = hypotheses::evaluate_corollary(t as i64, b);
    consistency_check_with(&verdict, bound)
}

/// As [`consistency_check`] against an already computed verdict.
pub fn consistency_check_with(verdict: &HypothesisVerdict, bound: i64) -> Result<ConsistencyReport> {
    let t = u64::try_from(verdict.t).map_err(|_| domain!("t = {} is negative", verdict.t))?;
    let b = &verdict.b;
    check_search_inputs(t, b, bound)?;
    let solutions = find_solutions(t, b, bound, false)?;
    let counterexamples: Vec<SolutionTriple> = match verdict.conclusion {
        Conclusion::CorollaryHolds => solutions.clone(),
        Conclusion::TheoremHolds => solutions.iter().copied().filter(|s| s.t_divides_z).collect(),
        Conclusion::NotApplicable => Vec::new(),
    };
    let status = if counterexamples.is_empty() {
        ConsistencyStatus::Pass
    } else {
        ConsistencyStatus::Contradiction
    };
    let box_desc = format!("max(|X|, |Y|) <= {bound}");
    let note = match (verdict.conclusion, status) {
        (_, ConsistencyStatus::Contradiction) => format!(
            "verdict {} is contradicted by {} solution(s) in {box_desc}",
            verdict.conclusion,
            counterexamples.len()
        ),
        (Conclusion::CorollaryHolds, _) => format!("corollary level: no solution in {box_desc}"),
        (Conclusion::TheoremHolds, _) => format!(
            "theorem level: {} solution(s) in {box_desc}, none with t | Z",
            solutions.len()
        ),
        (Conclusion::NotApplicable, _) => format!(
            "not applicable: {} solution(s) in {box_desc} reported only",
            solutions.len()
        ),
    };
    Ok(ConsistencyReport {
        t,
        b: b.clone(),
        bound,
        conclusion: verdict.conclusion,
        solutions,
        counterexamples,
        status,
        note,
    })
}

/// Consistency check sharing a precomputed good-prime verdict.
pub fn consistency_check_cached(
    t: u64,
    b: &BigInt,
    bound: i64,
    good: Option<&GoodPrimeVerdict>,
) -> Result<ConsistencyReport> {
    check_search_inputs(t, b, bound)?;
    let verdict = hypotheses::evaluate(t as i64, b, EvaluationMode::Full, good);
    consistency_check_with(&verdict, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn xyz(v: &[SolutionTriple]) -> Vec<(i64, i64, i64)> {
        v.iter().map(|s| (s.x, s.y, s.z)).collect()
    }

    #[test]
    fn search_examples() {
        let s = find_solutions(5, &big(2), 10, false).unwrap();
        assert!(xyz(&s).contains(&(1, 1, 1)));

        let s = find_solutions(5, &big(33), 10, false).unwrap();
        assert!(xyz(&s).contains(&(1, 2, 1)));
        assert!(xyz(&s).contains(&(2, 1, 1)));

        assert!(find_solutions(5, &big(3), 50, true).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(find_solutions(4, &big(2), 10, false).is_err());
        assert!(find_solutions(3, &big(2), 10, false).is_err());
        assert!(find_solutions(5, &big(0), 10, false).is_err());
        assert!(find_solutions(5, &big(2), 0, false).is_err());
    }

    #[test]
    fn solutions_verify_and_are_symmetric() {
        for (t, b) in [(5u64, 2i64), (5, 33), (7, 2), (5, -2), (7, 129), (5, 244)] {
            let b = big(b);
            let s = find_solutions(t, &b, 40, false).unwrap();
            let set: BTreeSet<_> = xyz(&s).into_iter().collect();
            for sol in &s {
                assert!(sol.verify(t, &b), "{sol} for t={t}");
                assert!(sol.z > 0);
                assert!(set.contains(&(sol.y, sol.x, sol.z)), "{sol} lacks its swap");
            }
        }
        // 3^5 + 1 = 244 = 244 * 1^5.
        assert!(xyz(&find_solutions(5, &big(244), 5, false).unwrap()).contains(&(3, 1, 1)));
        // Negative B flips the sign of X, Y: (-1)^5 + (-1)^5 = -2.
        assert!(xyz(&find_solutions(5, &big(-2), 5, false).unwrap()).contains(&(-1, -1, 1)));
    }

    #[test]
    fn finds_t_divides_z_solutions() {
        // 312 + 313 = 5^4, so 5^5 | 312^5 + 313^5 and Z = 5.
        let b = big(1_907_397_461);
        let s = find_solutions(5, &b, 313, true).unwrap();
        assert_eq!(xyz(&s), vec![(312, 313, 5), (313, 312, 5)]);
        assert!(s.iter().all(|s| s.t_divides_z));
        // B = 3251 * 586711 and 3251 ≡ 1 mod 5, so no verdict may cover it.
        let r = consistency_check(5, &b, 313).unwrap();
        assert_eq!(r.conclusion, Conclusion::NotApplicable);
        assert_eq!(r.status, ConsistencyStatus::Pass);
    }

    #[test]
    fn consistency_examples() {
        let r = consistency_check(5, &big(2), 30).unwrap();
        assert_eq!(r.status, ConsistencyStatus::Pass);
        assert_eq!(r.conclusion, Conclusion::TheoremHolds);
        assert!(xyz(&r.solutions).contains(&(1, 1, 1)));
        assert!(r.solutions.iter().all(|s| !s.t_divides_z));

        let r = consistency_check(5, &big(3), 30).unwrap();
        assert_eq!(r.status, ConsistencyStatus::Pass);
        assert_eq!(r.conclusion, Conclusion::CorollaryHolds);
        assert!(r.solutions.is_empty());

        let r = consistency_check(5, &big(33), 30).unwrap();
        assert_eq!(r.status, ConsistencyStatus::Pass);
        assert_eq!(r.conclusion, Conclusion::NotApplicable);
        assert!(!r.solutions.is_empty());
    }

    #[test]
    fn contradiction_is_reported() {
        // Forge a verdict that overclaims to exercise the contradiction path.
        let mut v = hypotheses::evaluate_corollary(5, &big(33));
        v.conclusion = Conclusion::CorollaryHolds;
        let r = consistency_check_with(&v, 5).unwrap();
        assert_eq!(r.status, ConsistencyStatus::Contradiction);
        assert!(xyz(&r.counterexamples).contains(&(1, 2, 1)));
    }
}
