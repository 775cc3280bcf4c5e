//! Exact integer and rational utilities shared by the rest of the crate.
//!
//! Everything here is exact: big integers from `num-bigint`, normalized
//! rationals from `num-rational`. Primality is Miller–Rabin, deterministic for
//! every 64-bit input (fixed base set covering all n < 2^64) and for all
//! n < 3.3·10^24 via the first thirteen prime bases; larger inputs are tested
//! against twenty prime bases and are therefore strong probable primes.
//!
//! Factorization is trial division by small primes followed by Pollard rho
//! (Brent variant) with a locally seeded generator, so the output is a pure
//! function of the input.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

const TRIAL_BOUND: u64 = 10_000;
const RHO_SEED: u64 = 0x5eed_f1f7_0000_0001;
const RHO_ATTEMPTS: usize = 64;

/// First twenty primes, used as Miller–Rabin bases.
const MR_BASES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

/// Complete prime factorization of a nonzero integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: BigInt,
    /// `1` or `-1`.
    pub sign: i8,
    /// `(prime, exponent)` with primes strictly increasing.
    pub factors: Vec<(BigInt, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.factors.iter().map(|(p, _)| p)
    }

    /// Multiplies the factorization back out.
    pub fn recompose(&self) -> BigInt {
        let mut acc = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            acc *= num_traits::pow(p.clone(), *e as usize);
        }
        acc
    }

    /// Every positive divisor, in increasing order.
    pub fn divisors(&self) -> Vec<BigInt> {
        let mut divs = vec![BigInt::one()];
        for (p, e) in &self.factors {
            let mut next = Vec::with_capacity(divs.len() * (*e as usize + 1));
            for d in &divs {
                let mut pk = d.clone();
                next.push(pk.clone());
                for _ in 0..*e {
                    pk *= p;
                    next.push(pk.clone());
                }
            }
            divs = next;
        }
        divs.sort();
        divs
    }
}

impl std::fmt::Display for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.sign < 0 {
            write!(f, "-")?;
        }
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Nonnegative residue of `a` modulo `m > 0`.
pub fn mod_floor(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

/// `base^exp mod m` for `m > 0`, result in `[0, m)`; negative bases allowed.
pub fn pow_mod(base: &BigInt, exp: &BigInt, m: &BigInt) -> BigInt {
    mod_floor(base, m).modpow(exp, m)
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = mod_floor(a, m);
    let egcd = a.extended_gcd(m);
    if !egcd.gcd.is_one() {
        return None;
    }
    Some(mod_floor(&egcd.x, m))
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES[..12] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // The first twelve primes form a deterministic base set below 2^64.
    'witness: for &a in &MR_BASES[..12] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_prime_big(n: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for &a in &MR_BASES {
        let a = BigUint::from(a);
        if (n % &a).is_zero() {
            return *n == a;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality test; see the module docs for the determinism range.
pub fn is_prime(n: &BigInt) -> bool {
    if n.sign() != Sign::Plus {
        return false;
    }
    match n.to_u64() {
        Some(small) => is_prime_u64(small),
        None => is_prime_big(n.magnitude()),
    }
}

pub fn is_prime_u(n: u64) -> bool {
    is_prime_u64(n)
}

/// All primes `<= n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn rho_u64(n: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    for _ in 0..RHO_ATTEMPTS {
        let c = rng.gen_range(1..n);
        let mut y = rng.gen_range(0..n);
        let f = |x: u64| ((mul_mod_u64(x, x, n) as u128 + c as u128) % n as u128) as u64;
        let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
        let m = 128u64;
        let (mut x, mut ys) = (0u64, 0u64);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod_u64(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    None
}

fn rho_big(n: &BigUint, rng: &mut ChaCha8Rng) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let one = BigUint::one();
    for _ in 0..RHO_ATTEMPTS {
        let c = BigUint::from(rng.gen::<u64>()) % n + &one;
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut x = BigUint::from(rng.gen::<u64>()) % n;
        let mut y = x.clone();
        // Floyd cycle detection with batched gcds.
        let mut g = one.clone();
        let mut steps = 0u64;
        while g == one {
            let mut q = one.clone();
            for _ in 0..64 {
                x = f(&x);
                y = f(&f(&y));
                let diff = if x > y { &x - &y } else { &y - &x };
                q = q * diff % n;
            }
            g = q.gcd(n);
            steps += 64;
            if steps > 1 << 24 {
                break;
            }
        }
        if g != one && &g != n {
            return Some(g);
        }
    }
    None
}

/// Finds a nontrivial factor of the composite `n`.
fn split(n: &BigUint, rng: &mut ChaCha8Rng) -> Result<BigUint> {
    // Perfect powers defeat rho; peel them off first.
    let bits = n.bits() as u32;
    for e in 2..=bits {
        let r = n.nth_root(e);
        if r <= BigUint::one() {
            break;
        }
        if num_traits::pow(r.clone(), e as usize) == *n {
            return Ok(r);
        }
    }
    let found = match n.to_u64() {
        Some(small) => rho_u64(small, rng).map(BigUint::from),
        None => rho_big(n, rng),
    };
    if let Some(f) = found {
        return Ok(f);
    }
    // Deterministic fallback for anything rho missed.
    if let Some(small) = n.to_u64() {
        let mut d = TRIAL_BOUND | 1;
        while d.saturating_mul(d) <= small {
            if small % d == 0 {
                return Ok(BigUint::from(d));
            }
            d += 2;
        }
    }
    Err(Error::FactorizationFailed(n.to_string()))
}

/// Complete prime factorization of a nonzero integer.
pub fn factorize(n: &BigInt) -> Result<Factorization> {
    if n.is_zero() {
        return Err(domain!("cannot factor 0"));
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut rest = n.magnitude().clone();
    let mut primes: Vec<BigUint> = Vec::new();

    for p in primes_up_to(TRIAL_BOUND) {
        let p = BigUint::from(p);
        if &p * &p > rest {
            break;
        }
        while (&rest % &p).is_zero() {
            rest /= &p;
            primes.push(p.clone());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(RHO_SEED);
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&BigInt::from(m.clone())) {
            primes.push(m);
            continue;
        }
        let f = split(&m, &mut rng)?;
        let cofactor = &m / &f;
        stack.push(f);
        stack.push(cofactor);
    }

    primes.sort();
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    for p in primes {
        let p = BigInt::from(p);
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(Factorization {
        value: n.clone(),
        sign,
        factors,
    })
}

/// Euler's totient.
pub fn euler_phi(n: &BigInt) -> Result<BigInt> {
    if n < &BigInt::one() {
        return Err(domain!("euler_phi requires n >= 1, got {n}"));
    }
    let fact = factorize(n)?;
    let mut phi = BigInt::one();
    for (p, e) in &fact.factors {
        phi *= num_traits::pow(p.clone(), *e as usize - 1) * (p - 1);
    }
    Ok(phi)
}

/// Exact `t`-th root: `Some(r)` with `r^t = n`, else `None`.
///
/// Negative `n` only has a root for odd `t`.
pub fn integer_root(n: &BigInt, t: u32) -> Option<BigInt> {
    if t == 0 {
        return None;
    }
    if n.is_negative() && t % 2 == 0 {
        return None;
    }
    let r = n.nth_root(t);
    (num_traits::pow(r.clone(), t as usize) == *n).then_some(r)
}

/// `gcd(|a|, |b|)`.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

/// Reduces `r` modulo `m`, failing if the denominator is not a unit mod `m`.
pub fn rat_mod(r: &Rat, m: &BigInt) -> Option<BigInt> {
    let inv = inv_mod(r.denom(), m)?;
    Some(mod_floor(&(r.numer() * inv), m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            if e > 0 {
                out.push((d, e));
            }
            d += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    fn as_pairs(f: &Factorization) -> Vec<(u64, u32)> {
        f.factors.iter().map(|(p, e)| (p.to_u64().unwrap(), *e)).collect()
    }

    #[test]
    fn factor_examples() {
        let f = factorize(&big(33)).unwrap();
        assert_eq!(as_pairs(&f), vec![(3, 1), (11, 1)]);
        assert_eq!(f.sign, 1);

        let f = factorize(&big(-2)).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(as_pairs(&f), vec![(2, 1)]);

        let f = factorize(&big(2310)).unwrap();
        assert_eq!(as_pairs(&f), trial_factor(2310));
        assert_eq!(as_pairs(&f), vec![(2, 1), (3, 1), (5, 1), (7, 1), (11, 1)]);

        assert!(matches!(factorize(&big(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn factor_unit_and_large() {
        let f = factorize(&big(1)).unwrap();
        assert!(f.factors.is_empty());
        assert_eq!(f.recompose(), big(1));

        // Product of two primes above the trial bound.
        let n = big(999_983) * big(1_000_003);
        let f = factorize(&n).unwrap();
        assert_eq!(as_pairs(&f), vec![(999_983, 1), (1_000_003, 1)]);

        let n = big(1_000_003).pow(3) * big(4);
        let f = factorize(&n).unwrap();
        assert_eq!(as_pairs(&f), vec![(2, 2), (1_000_003, 3)]);

        // Beyond 64 bits: (2^61 - 1) * (2^31 - 1) * 3
        let m61 = (BigInt::one() << 61) - 1;
        let m31 = (BigInt::one() << 31) - 1;
        let n = &m61 * &m61 * &m31 * 3;
        let f = factorize(&n).unwrap();
        assert_eq!(f.factors, vec![(big(3), 1), (m31, 1), (m61, 2)]);
    }

    #[test]
    fn divisors_of_twelve() {
        let f = factorize(&big(12)).unwrap();
        let d: Vec<i64> = f.divisors().iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(d, vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(euler_phi(&big(1)).unwrap(), big(1));
        let direct = (1..33).filter(|k: &i64| k.gcd(&33) == 1).count() as i64;
        assert_eq!(direct, 20);
        assert_eq!(euler_phi(&big(33)).unwrap(), big(direct));
        assert_eq!(euler_phi(&big(37)).unwrap(), big(36));
        assert!(euler_phi(&big(0)).is_err());
        assert!(euler_phi(&big(-5)).is_err());
    }

    #[test]
    fn root_examples() {
        assert_eq!(integer_root(&big(32), 5), Some(big(2)));
        assert_eq!(integer_root(&big(-32), 5), Some(big(-2)));
        assert_eq!(integer_root(&big(33), 5), None);
        assert_eq!(integer_root(&big(0), 7), Some(big(0)));
        assert_eq!(integer_root(&big(-4), 2), None);
    }

    #[test]
    fn prime_examples() {
        assert!(is_prime(&big(37)));
        assert!(!is_prime(&big(1)));
        assert!(!is_prime(&big(2310)));
        assert!(!is_prime(&big(-7)));
        assert!(!is_prime(&big(0)));
        assert!(is_prime(&big(2)));
        // Strong pseudoprime to bases 2..37 handled by the full base set.
        assert!(!is_prime(&BigInt::from(3_825_123_056_546_413_051u64)));
        assert!(is_prime(&((BigInt::one() << 89) - 1)));
        assert!(!is_prime(&((BigInt::one() << 67) - 1)));
    }

    #[test]
    fn primality_matches_sieve() {
        let sieve = primes_up_to(20_000);
        let from_test: Vec<u64> = (0..=20_000u64).filter(|&n| is_prime_u(n)).collect();
        assert_eq!(sieve, from_test);
    }

    #[test]
    fn rat_mod_reduces() {
        let r = Rat::new(big(1), big(6));
        assert_eq!(rat_mod(&r, &big(5)), Some(big(1)));
        assert_eq!(rat_mod(&r, &big(125)), Some(big(21)));
        assert_eq!(rat_mod(&r, &big(9)), None);
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| Rat::new(big(n), big(d)))
    }

    proptest! {
        #[test]
        fn factorization_recomposes(n in -1_000_000_000_000i64..1_000_000_000_000i64) {
            prop_assume!(n != 0);
            let f = factorize(&big(n)).unwrap();
            prop_assert_eq!(f.recompose(), big(n));
            for w in f.factors.windows(2) {
                prop_assert!(w[0].0 < w[1].0);
            }
            for (p, e) in &f.factors {
                prop_assert!(is_prime(p));
                prop_assert!(*e >= 1);
            }
        }

        #[test]
        fn phi_is_multiplicative(m in 1i64..=1_000_000, n in 1i64..=1_000_000) {
            prop_assume!(m.gcd(&n) == 1);
            let lhs = euler_phi(&big(m * n)).unwrap();
            let rhs = euler_phi(&big(m)).unwrap() * euler_phi(&big(n)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn root_inverts_power(r in -1000i64..=1000, t in prop::sample::select(vec![5u32, 7, 11])) {
            let n = big(r).pow(t);
            prop_assert_eq!(integer_root(&n, t), Some(big(r)));
        }

        #[test]
        fn rationals_form_a_field(a in small_rat(), b in small_rat(), c in small_rat()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.recip(), Rat::one());
            }
            prop_assert_eq!(&a + &(-&a), Rat::zero());
            prop_assert!(a.denom() > &BigInt::zero());
            prop_assert!(a.numer().gcd(a.denom()).is_one());
        }
    }
}
