//! Bernoulli numbers: exact, modular, and the irregularity data of a prime.
//!
//! Convention: `B_1 = -1/2`, so that `Σ_{j=0}^{k} C(k+1, j) B_j = 0` for
//! `k >= 1` and `Σ_{x=0}^{M-1} x^k = (1/(k+1)) Σ_j C(k+1, j) B_j M^{k+1-j}`.
//!
//! Three independent routes are provided:
//!
//! * [`bernoulli_exact`]: the recurrence over exact rationals, memoized.
//! * [`irregular_pairs`]: the same recurrence carried out in `Z/t`, valid for
//!   indices `k <= t - 3` where every `B_k` is `t`-integral.
//! * [`bernoulli_mod_prime_cube`]: the power sum `S_k(t⁴) = Σ_{x<t⁴} x^k`. If
//!   `(t-1) ∤ k` then every Faulhaber term past the leading `B_k·t⁴` has
//!   `t`-valuation at least 7, hence `S_k(t⁴) / t⁴ ≡ B_k (mod t³)`. Works in
//!   `Z/t⁷` with `t⁷ < 2^63` so sums never overflow (`t <= 509`).

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, inv_mod, mod_floor, mul_mod_u64, pow_mod_u64, Rat};
use crate::assumption::{self, Assumption, VANDIVER_VERIFIED_BOUND};
use crate::error::{domain, Error, Result};

/// Default cap on the exact recurrence used by [`bernoulli_mod`].
pub const DEFAULT_EXACT_CAP: u64 = 2000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrregularityReport {
    pub t: u64,
    /// Even `k` in `[2, t-3]` with `t | B_k`.
    pub irregular_pairs: Vec<u64>,
    pub iota: usize,
    /// `(n, B_{2nt} mod t³)` for `n = 1 … (t-3)/2`, when the scan was run.
    pub scan_mod_t_cubed: Option<Vec<(u64, u64)>>,
    pub vandiver_assumed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoodPrimeBranch {
    IotaZero,
    BernoulliScanWithVandiver,
    NotGood,
}

impl std::fmt::Display for GoodPrimeBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GoodPrimeBranch::IotaZero => "IotaZero",
            GoodPrimeBranch::BernoulliScanWithVandiver => "BernoulliScanWithVandiver",
            GoodPrimeBranch::NotGood => "NotGood",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodPrimeVerdict {
    pub t: u64,
    pub is_good: bool,
    pub branch: GoodPrimeBranch,
    pub report: IrregularityReport,
    pub assumptions: Vec<Assumption>,
    /// Why the verdict came out as it did, in one line.
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GoodPrimeOptions {
    /// Also run the `B_{2nt} mod t³` scan when `ι(t) = 0`.
    pub full_scan: bool,
}

/// Memo table of exact Bernoulli numbers `B_0 … B_n`.
///
/// Readers share the lock; extension takes it exclusively.
#[derive(Debug, Default)]
pub struct BernoulliTable {
    values: RwLock<Vec<Rat>>,
}

impl BernoulliTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, k: u64) -> Rat {
        let k = k as usize;
        {
            let values = self.values.read().unwrap();
            if let Some(v) = values.get(k) {
                return v.clone();
            }
        }
        let mut values = self.values.write().unwrap();
        extend_table(&mut values, k);
        values[k].clone()
    }
}

fn extend_table(values: &mut Vec<Rat>, upto: usize) {
    let zero = Rat::zero();
    if values.is_empty() {
        values.push(Rat::one());
    }
    while values.len() <= upto {
        let k = values.len();
        if k == 1 {
            values.push(Rat::new((-1).into(), 2.into()));
            continue;
        }
        if k % 2 == 1 {
            values.push(zero.clone());
            continue;
        }
        // B_k = -(1/(k+1)) Σ_{j<k} C(k+1, j) B_j, skipping the odd zeros.
        let mut binom = BigInt::one();
        let mut sum = Rat::zero();
        for (j, bj) in values.iter().enumerate() {
            if !bj.is_zero() {
                sum += bj * Rat::from_integer(binom.clone());
            }
            binom = binom * (k + 1 - j) / (j + 1);
        }
        values.push(-sum / Rat::from_integer(BigInt::from(k + 1)));
    }
}

fn global_table() -> &'static BernoulliTable {
    static TABLE: OnceLock<BernoulliTable> = OnceLock::new();
    TABLE.get_or_init(BernoulliTable::new)
}

/// Exact `B_k`.
pub fn bernoulli_exact(k: u64) -> Rat {
    global_table().get(k)
}

/// `B_k mod m` through the exact rational, with the default cap.
pub fn bernoulli_mod(k: u64, m: &BigInt) -> Result<BigInt> {
    bernoulli_mod_with_cap(k, m, DEFAULT_EXACT_CAP)
}

pub fn bernoulli_mod_with_cap(k: u64, m: &BigInt, cap: u64) -> Result<BigInt> {
    if m < &BigInt::from(2) {
        return Err(domain!("modulus must be at least 2, got {m}"));
    }
    if k > cap {
        return Err(Error::ExactCapExceeded { k, cap });
    }
    let b = bernoulli_exact(k);
    match inv_mod(b.denom(), m) {
        Some(inv) => Ok(mod_floor(&(b.numer() * inv), m)),
        None => {
            let g = b.denom().gcd(m);
            let prime = arith::factorize(&g)?
                .primes()
                .next()
                .and_then(|p| p.to_u64())
                .unwrap_or(0);
            Err(Error::DenominatorNotInvertible {
                k,
                modulus: m.to_string(),
                prime,
            })
        }
    }
}

fn check_prime_exponent(t: u64, min: u64) -> Result<()> {
    if t < min || !arith::is_prime_u(t) {
        return Err(domain!("t = {t} must be a prime >= {min}"));
    }
    Ok(())
}

/// `t⁷`, when it is below `2^63`.
fn scan_modulus(t: u64) -> Option<u64> {
    (0..7)
        .try_fold(1u64, |acc, _| acc.checked_mul(t))
        .filter(|&m| m < 1 << 63)
}

/// `Σ_{x=1}^{t⁴-1} x^{k·e} mod t⁷` for every exponent multiple `e = 1..=count`,
/// in one pass over `x`.
fn power_sums(t: u64, k: u64, count: usize) -> Result<Vec<u64>> {
    let modulus = scan_modulus(t).ok_or(Error::ScanOutOfRange { t })?;
    let upper = t * t * t * t;
    const CHUNK: u64 = 1 << 14;
    let chunks = upper.div_ceil(CHUNK);
    let partials: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0u64; count];
            let start = (c * CHUNK).max(1);
            let end = ((c + 1) * CHUNK).min(upper);
            for x in start..end {
                let base = pow_mod_u64(x, k, modulus);
                let mut p = base;
                for slot in acc.iter_mut() {
                    *slot += p;
                    if *slot >= modulus {
                        *slot -= modulus;
                    }
                    p = mul_mod_u64(p, base, modulus);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0u64; count];
    for part in partials {
        for (slot, v) in total.iter_mut().zip(part) {
            *slot = (*slot + v) % modulus;
        }
    }
    Ok(total)
}

/// `S_k(t⁴) / t⁴ mod t³` from a power sum taken modulo `t⁷`.
fn lift_power_sum(sum: u64, t: u64) -> u64 {
    let t4 = t * t * t * t;
    assert_eq!(sum % t4, 0, "power sum not divisible by t^4: Faulhaber bound violated");
    sum / t4
}

/// `B_k mod t³` by the power-sum method, never forming the rational `B_k`.
pub fn bernoulli_mod_prime_cube(k: u64, t: u64) -> Result<u64> {
    check_prime_exponent(t, 3)?;
    if k == 0 || k % 2 == 1 {
        return Err(domain!("k = {k} must be even and positive"));
    }
    if k % (t - 1) == 0 {
        return Err(domain!("(t-1) = {} divides k = {k}", t - 1));
    }
    let sums = power_sums(t, k, 1)?;
    Ok(lift_power_sum(sums[0], t))
}

/// `(n, B_{2nt} mod t³)` for `n = 1 … (t-3)/2`.
pub fn scan_b2nt_mod_t_cubed(t: u64) -> Result<Vec<(u64, u64)>> {
    check_prime_exponent(t, 5)?;
    let count = ((t - 3) / 2) as usize;
    // x^{2nt} = (x^{2t})^n, so one base exponent covers every n.
    let sums = power_sums(t, 2 * t, count)?;
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| (i as u64 + 1, lift_power_sum(s, t)))
        .collect())
}

/// `B_k mod t` for every even `k` in `[2, t-3]`, by the recurrence in `Z/t`.
fn bernoulli_mod_t_table(t: u64) -> Vec<(u64, u64)> {
    let n = (t - 2) as usize;
    let mut fact = vec![1u64; n + 1];
    for i in 1..=n {
        fact[i] = mul_mod_u64(fact[i - 1], i as u64, t);
    }
    let inv = |a: u64| pow_mod_u64(a, t - 2, t);
    let inv_fact: Vec<u64> = fact.iter().map(|&f| inv(f)).collect();
    let binom = |a: usize, b: usize| mul_mod_u64(mul_mod_u64(fact[a], inv_fact[b], t), inv_fact[a - b], t);

    // index -> B_index mod t, odd entries beyond 1 are zero and skipped.
    let half = t - inv(2); // -1/2
    let mut even: Vec<u64> = vec![1]; // B_0
    let mut out = Vec::new();
    for k in (2..=n - 1).step_by(2) {
        let mut sum = (1 + mul_mod_u64(binom(k + 1, 1), half, t)) % t;
        for (i, &b) in even.iter().enumerate().skip(1) {
            sum = (sum + mul_mod_u64(binom(k + 1, 2 * i), b, t)) % t;
        }
        let bk = mul_mod_u64(t - sum % t, inv((k + 1) as u64), t) % t;
        even.push(bk);
        out.push((k as u64, bk));
    }
    out
}

/// Irregular pairs and the index of irregularity of `t`.
pub fn irregular_pairs(t: u64) -> Result<IrregularityReport> {
    check_prime_exponent(t, 5)?;
    let pairs: Vec<u64> = bernoulli_mod_t_table(t)
        .into_iter()
        .filter(|&(_, r)| r == 0)
        .map(|(k, _)| k)
        .collect();
    Ok(IrregularityReport {
        t,
        iota: pairs.len(),
        irregular_pairs: pairs,
        scan_mod_t_cubed: None,
        vandiver_assumed: false,
    })
}

/// Re-derives the irregular pairs of `t` from exact rationals, when every
/// index involved is within `cap`. `Some(true)` means both routes agree.
pub fn cross_check_exact(t: u64, cap: u64) -> Result<Option<bool>> {
    let report = irregular_pairs(t)?;
    if t - 3 > cap {
        return Ok(None);
    }
    let m = BigInt::from(t);
    let mut exact = Vec::new();
    for k in (2..=t - 3).step_by(2) {
        if bernoulli_mod_with_cap(k, &m, cap)?.is_zero() {
            exact.push(k);
        }
    }
    Ok(Some(exact == report.irregular_pairs))
}

pub fn good_prime_check(t: u64) -> Result<GoodPrimeVerdict> {
    good_prime_check_with(t, GoodPrimeOptions::default())
}

/// Decides whether `t > 3` is a good prime.
///
/// `ι(t) = 0` suffices. Otherwise every `B_{2nt}` must be nonzero mod `t³`
/// and `t` must lie in the range where `t ∤ h_t⁺` is known; the latter is
/// recorded as an assumption, never computed. Anything else, including a scan
/// the crate cannot run, is reported as not good.
pub fn good_prime_check_with(t: u64, opts: GoodPrimeOptions) -> Result<GoodPrimeVerdict> {
    if t <= 3 || !arith::is_prime_u(t) {
        return Err(domain!("t = {t} must be a prime > 3"));
    }
    let mut report = irregular_pairs(t)?;
    if report.iota == 0 {
        if opts.full_scan {
            report.scan_mod_t_cubed = scan_b2nt_mod_t_cubed(t).ok();
        }
        return Ok(GoodPrimeVerdict {
            t,
            is_good: true,
            branch: GoodPrimeBranch::IotaZero,
            report,
            assumptions: Vec::new(),
            reason: format!("t = {t} is regular (iota = 0)"),
        });
    }

    let not_good = |report: IrregularityReport, reason: String| GoodPrimeVerdict {
        t,
        is_good: false,
        branch: GoodPrimeBranch::NotGood,
        report,
        assumptions: Vec::new(),
        reason,
    };

    let scan = match scan_b2nt_mod_t_cubed(t) {
        Ok(scan) => scan,
        Err(e) => {
            let reason = format!("iota = {} and the B_(2nt) scan was not run: {e}", report.iota);
            return Ok(not_good(report, reason));
        }
    };
    let first_zero = scan.iter().find(|&&(_, r)| r == 0).map(|&(n, _)| n);
    report.scan_mod_t_cubed = Some(scan);

    if let Some(n) = first_zero {
        let reason = format!("t^3 divides B_{} (n = {n})", 2 * n * t);
        return Ok(not_good(report, reason));
    }
    if t >= VANDIVER_VERIFIED_BOUND {
        let reason = format!(
            "scan clean but t = {t} is outside the range where t does not divide h_t+ is known"
        );
        return Ok(not_good(report, reason));
    }
    report.vandiver_assumed = true;
    let reason = format!(
        "iota = {}; all {} residues B_(2nt) mod t^3 nonzero; t < {VANDIVER_VERIFIED_BOUND}",
        report.iota,
        (t - 3) / 2
    );
    Ok(GoodPrimeVerdict {
        t,
        is_good: true,
        branch: GoodPrimeBranch::BernoulliScanWithVandiver,
        report,
        assumptions: vec![assumption::vandiver(t)],
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn binomial(n: u64, k: u64) -> BigInt {
        let mut b = BigInt::one();
        for i in 0..k {
            b = b * (n - i) / (i + 1);
        }
        b
    }

    #[test]
    fn exact_examples() {
        assert_eq!(bernoulli_exact(0), rat(1, 1));
        assert_eq!(bernoulli_exact(1), rat(-1, 2));
        assert_eq!(bernoulli_exact(2), rat(1, 6));
        assert_eq!(bernoulli_exact(3), rat(0, 1));
        assert_eq!(bernoulli_exact(12), rat(-691, 2730));
        assert_eq!(2730, 2 * 3 * 5 * 7 * 13);
        assert_eq!(bernoulli_exact(22), rat(854513, 138));
    }

    #[test]
    fn recurrence_identity() {
        for k in 1..=60u64 {
            let sum: Rat = (0..=k)
                .map(|j| bernoulli_exact(j) * Rat::from_integer(binomial(k + 1, j)))
                .sum();
            assert!(sum.is_zero(), "k = {k}");
        }
    }

    #[test]
    fn von_staudt_clausen_denominators() {
        for k in (2..=60u64).step_by(2) {
            let expected: u64 = arith::primes_up_to(k + 1)
                .into_iter()
                .filter(|q| k % (q - 1) == 0)
                .product();
            assert_eq!(bernoulli_exact(k).denom(), &BigInt::from(expected), "k = {k}");
        }
    }

    #[test]
    fn kummer_congruences() {
        for t in [5u64, 7, 11, 13] {
            let tb = BigInt::from(t);
            let ks: Vec<u64> = (2..=60).step_by(2).filter(|k| k % (t - 1) != 0).collect();
            for &k1 in &ks {
                for &k2 in &ks {
                    if (k1 as i64 - k2 as i64) % (t as i64 - 1) != 0 {
                        continue;
                    }
                    let r1 = arith::rat_mod(&(bernoulli_exact(k1) / Rat::from_integer(k1.into())), &tb);
                    let r2 = arith::rat_mod(&(bernoulli_exact(k2) / Rat::from_integer(k2.into())), &tb);
                    assert_eq!(r1, r2, "t={t} k1={k1} k2={k2}");
                }
            }
        }
    }

    #[test]
    fn modular_examples() {
        assert_eq!(bernoulli_mod(32, &37.into()).unwrap(), BigInt::zero());
        assert_eq!(bernoulli_mod(2, &5.into()).unwrap(), BigInt::one());
        assert!(matches!(
            bernoulli_mod(4, &3.into()),
            Err(Error::DenominatorNotInvertible { prime: 3, .. })
        ));
        assert!(matches!(
            bernoulli_mod_with_cap(40, &7.into(), 20),
            Err(Error::ExactCapExceeded { k: 40, cap: 20 })
        ));
        assert!(bernoulli_mod(2, &1.into()).is_err());
    }

    #[test]
    fn prime_cube_examples() {
        assert_eq!(bernoulli_mod_prime_cube(2, 5).unwrap(), 21);
        assert_eq!(arith::rat_mod(&rat(1, 6), &125.into()), Some(21.into()));

        let r = bernoulli_mod_prime_cube(32, 37).unwrap();
        assert_eq!(r % 37, 0);
        assert_ne!(r, 0);
        assert_eq!(BigInt::from(r), bernoulli_mod(32, &(37 * 37 * 37).into()).unwrap());

        let r = bernoulli_mod_prime_cube(22, 11).unwrap();
        assert_eq!(Some(BigInt::from(r)), arith::rat_mod(&rat(854513, 138), &1331.into()));

        assert!(bernoulli_mod_prime_cube(4, 5).is_err());
        assert!(bernoulli_mod_prime_cube(3, 7).is_err());
        assert!(bernoulli_mod_prime_cube(2, 9).is_err());
    }

    #[test]
    fn modular_recurrence_matches_exact() {
        for t in arith::primes_up_to(110).into_iter().filter(|&t| t >= 5) {
            for (k, r) in bernoulli_mod_t_table(t) {
                let exact = bernoulli_mod(k, &t.into()).unwrap();
                assert_eq!(BigInt::from(r), exact, "t={t} k={k}");
            }
        }
    }

    #[test]
    fn irregular_examples() {
        let r = irregular_pairs(7).unwrap();
        assert!(r.irregular_pairs.is_empty());
        assert_eq!(r.iota, 0);
        assert_eq!(irregular_pairs(37).unwrap().irregular_pairs, vec![32]);
        assert_eq!(irregular_pairs(59).unwrap().irregular_pairs, vec![44]);
        assert_eq!(irregular_pairs(67).unwrap().irregular_pairs, vec![58]);
        // 157 is the first prime with iota = 2.
        assert_eq!(irregular_pairs(157).unwrap().irregular_pairs, vec![62, 110]);
        assert!(irregular_pairs(3).is_err());
        assert!(irregular_pairs(9).is_err());
    }

    #[test]
    fn exact_cross_check() {
        assert_eq!(cross_check_exact(37, 2000).unwrap(), Some(true));
        assert_eq!(cross_check_exact(101, 2000).unwrap(), Some(true));
        assert_eq!(cross_check_exact(101, 50).unwrap(), None);
    }

    #[test]
    fn regular_below_37() {
        for t in arith::primes_up_to(36).into_iter().filter(|&t| t >= 5) {
            assert_eq!(irregular_pairs(t).unwrap().iota, 0, "t={t}");
        }
    }

    #[test]
    fn good_prime_examples() {
        let v = good_prime_check(5).unwrap();
        assert!(v.is_good);
        assert_eq!(v.branch, GoodPrimeBranch::IotaZero);
        assert!(v.report.scan_mod_t_cubed.is_none());

        let v = good_prime_check_with(7, GoodPrimeOptions { full_scan: true }).unwrap();
        assert_eq!(v.report.scan_mod_t_cubed.as_ref().unwrap().len(), 2);

        assert!(good_prime_check(3).is_err());
        assert!(good_prime_check(25).is_err());
    }

    #[test]
    fn scan_matches_exact_for_small_t() {
        for t in [5u64, 7, 11] {
            let scan = scan_b2nt_mod_t_cubed(t).unwrap();
            assert_eq!(scan.len() as u64, (t - 3) / 2);
            let m = BigInt::from(t * t * t);
            for (n, r) in scan {
                assert_eq!(BigInt::from(r), bernoulli_mod(2 * n * t, &m).unwrap(), "t={t} n={n}");
            }
        }
    }

    #[test]
    fn concurrent_table_readers() {
        let table = BernoulliTable::new();
        std::thread::scope(|s| {
            for k in [10u64, 40, 20, 60] {
                let table = &table;
                s.spawn(move || assert_eq!(table.get(k), bernoulli_exact(k)));
            }
        });
    }
}
