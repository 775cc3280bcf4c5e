//! Exact arithmetic in `Q(ζ_t)` and the identities the descent argument uses.
//!
//! Elements are coefficient vectors in the power basis `1, ζ, …, ζ^{t-2}`.
//! Products are formed modulo `x^t - 1` and then reduced with
//! `ζ^{t-1} = -(1 + ζ + … + ζ^{t-2})`, so every stored value is canonical and
//! equality is structural.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Rat};
use crate::error::{domain, Result};
use crate::modgroup;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycElem {
    t: u64,
    coeffs: Vec<Rat>,
}

fn check_t(t: u64) -> Result<()> {
    if t < 5 || !arith::is_prime_u(t) {
        return Err(domain!("cyclotomic arithmetic needs a prime t >= 5, got {t}"));
    }
    Ok(())
}

/// Reduces a polynomial in `ζ` to the power basis.
fn reduce(t: u64, poly: impl IntoIterator<Item = (usize, Rat)>) -> Vec<Rat> {
    let t = t as usize;
    let mut folded = vec![Rat::zero(); t];
    for (i, c) in poly {
        folded[i % t] += c;
    }
    let top = folded.pop().unwrap();
    if !top.is_zero() {
        for c in folded.iter_mut() {
            *c -= &top;
        }
    }
    folded
}

impl CycElem {
    pub fn zero(t: u64) -> Result<Self> {
        check_t(t)?;
        Ok(Self { t, coeffs: vec![Rat::zero(); t as usize - 1] })
    }

    pub fn from_int(t: u64, n: impl Into<BigInt>) -> Result<Self> {
        Self::from_rat(t, Rat::from_integer(n.into()))
    }

    pub fn from_rat(t: u64, r: Rat) -> Result<Self> {
        let mut z = Self::zero(t)?;
        z.coeffs[0] = r;
        Ok(z)
    }

    pub fn one(t: u64) -> Result<Self> {
        Self::from_int(t, 1)
    }

    /// `ζ^e` for any integer exponent.
    pub fn zeta_pow(t: u64, e: i64) -> Result<Self> {
        check_t(t)?;
        let e = e.rem_euclid(t as i64) as usize;
        Ok(Self { t, coeffs: reduce(t, [(e, Rat::one())]) })
    }

    pub fn zeta(t: u64) -> Result<Self> {
        Self::zeta_pow(t, 1)
    }

    /// `Σ cᵢ ζ^i` for a coefficient list of any length.
    pub fn from_poly(t: u64, coeffs: Vec<Rat>) -> Result<Self> {
        check_t(t)?;
        Ok(Self { t, coeffs: reduce(t, coeffs.into_iter().enumerate()) })
    }

    pub fn from_int_poly(t: u64, coeffs: &[i64]) -> Result<Self> {
        Self::from_poly(t, coeffs.iter().map(|&c| Rat::from_integer(c.into())).collect())
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational value, if the element lies in `Q`.
    pub fn as_scalar(&self) -> Option<&Rat> {
        self.coeffs[1..].iter().all(Zero::is_zero).then(|| &self.coeffs[0])
    }

    /// Membership in `Z[ζ]`.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    fn same_t(&self, other: &Self) -> Result<()> {
        if self.t != other.t {
            return Err(domain!("mismatched cyclotomic fields: t = {} vs t = {}", self.t, other.t));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_t(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { t: self.t, coeffs })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_t(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { t: self.t, coeffs })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_t(other)?;
        let t = self.t as usize;
        let mut prod = vec![Rat::zero(); t];
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in other.coeffs.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                prod[(i + j) % t] += a * b;
            }
        }
        Ok(Self { t: self.t, coeffs: reduce(self.t, prod.into_iter().enumerate()) })
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self { t: self.t, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.t).unwrap();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// The automorphism `ζ ↦ ζ^a`.
    pub fn galois(&self, a: i64) -> Result<Self> {
        let a = a.rem_euclid(self.t as i64) as usize;
        if a == 0 {
            return Err(domain!("galois exponent must be prime to t = {}", self.t));
        }
        let t = self.t as usize;
        let terms = self.coeffs.iter().enumerate().map(|(i, c)| (i * a % t, c.clone()));
        Ok(Self { t: self.t, coeffs: reduce(self.t, terms) })
    }

    /// Complex conjugation, `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Self {
        self.galois(self.t as i64 - 1).unwrap()
    }

    pub fn is_real(&self) -> bool {
        self.conj() == *self
    }

    /// Field norm down to `Q`: the product of all conjugates.
    pub fn norm(&self) -> Rat {
        let mut acc = self.clone();
        for a in 2..self.t as i64 {
            acc = &acc * &self.galois(a).unwrap();
        }
        acc.as_scalar()
            .cloned()
            .expect("product of all conjugates is not rational: arithmetic bug")
    }

    /// Units of `Z[ζ]` are the integral elements of norm `±1`.
    pub fn is_unit(&self) -> Result<bool> {
        if !self.is_integral() {
            return Err(domain!("is_unit expects an element of Z[zeta]"));
        }
        Ok(self.norm().abs().is_one())
    }

    /// Inverse by the extended Euclidean algorithm against `Φ_t` over `Q`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(domain!("zero has no inverse"));
        }
        let phi = vec![Rat::one(); self.t as usize];
        let (gcd, s) = poly_inverse_cofactor(phi, self.coeffs.clone());
        // Φ_t is irreducible, so the gcd is a nonzero constant.
        let c = gcd.first().cloned().expect("gcd of nonzero polynomials is nonzero");
        debug_assert_eq!(gcd.len(), 1);
        let inv = Self::from_poly(self.t, s)?.scale(&c.recip());
        Ok(inv)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.inverse()?)
    }
}

fn trim(p: &mut Vec<Rat>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_sub_mul(a: &[Rat], q: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let len = a.len().max(q.len() + b.len());
    let mut out = vec![Rat::zero(); len];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, qi) in q.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] -= qi * bj;
        }
    }
    trim(&mut out);
    out
}

fn poly_divrem(mut a: Vec<Rat>, b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    trim(&mut a);
    let lead = b.last().unwrap().clone();
    if a.len() < b.len() {
        return (Vec::new(), a);
    }
    let mut q = vec![Rat::zero(); a.len() - b.len() + 1];
    while a.len() >= b.len() && !a.is_empty() {
        let shift = a.len() - b.len();
        let c = a.last().unwrap() / &lead;
        for (j, bj) in b.iter().enumerate() {
            a[shift + j] -= &c * bj;
        }
        q[shift] = c;
        a.pop();
        trim(&mut a);
    }
    (q, a)
}

/// Returns `(g, s)` with `s·b ≡ g (mod m)` and `g = gcd(m, b)`.
fn poly_inverse_cofactor(m: Vec<Rat>, mut b: Vec<Rat>) -> (Vec<Rat>, Vec<Rat>) {
    trim(&mut b);
    let (mut r0, mut r1) = (m, b);
    let (mut s0, mut s1): (Vec<Rat>, Vec<Rat>) = (Vec::new(), vec![Rat::one()]);
    while !r1.is_empty() {
        let (q, r) = poly_divrem(r0, &r1);
        let s = poly_sub_mul(&s0, &q, &s1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    (r0, s0)
}

impl Add for &CycElem {
    type Output = CycElem;
    fn add(self, rhs: &CycElem) -> CycElem {
        self.try_add(rhs).expect("CycElem addition")
    }
}

impl Sub for &CycElem {
    type Output = CycElem;
    fn sub(self, rhs: &CycElem) -> CycElem {
        self.try_sub(rhs).expect("CycElem subtraction")
    }
}

impl Mul for &CycElem {
    type Output = CycElem;
    fn mul(self, rhs: &CycElem) -> CycElem {
        self.try_mul(rhs).expect("CycElem multiplication")
    }
}

impl Neg for &CycElem {
    type Output = CycElem;
    fn neg(self) -> CycElem {
        CycElem { t: self.t, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl fmt::Debug for CycElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycElem(t={}, {self})", self.t)
    }
}

impl fmt::Display for CycElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => c.to_string(),
                1 => format!("({c})z"),
                _ => format!("({c})z^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// `1 - ζ^a`.
pub fn one_minus_zeta_pow(t: u64, a: i64) -> Result<CycElem> {
    Ok(&CycElem::one(t)? - &CycElem::zeta_pow(t, a)?)
}

/// `λ_a = (1 - ζ^a)(1 - ζ^{-a})`.
pub fn lambda_a(t: u64, a: i64) -> Result<CycElem> {
    Ok(&one_minus_zeta_pow(t, a)? * &one_minus_zeta_pow(t, -a)?)
}

/// `λ = (1 - ζ)(1 - ζ̄)`.
pub fn lambda(t: u64) -> Result<CycElem> {
    lambda_a(t, 1)
}

pub fn default_valuation_cap(t: u64) -> u32 {
    4 * (t as u32 - 1)
}

/// Largest `k <= cap` with `(1 - ζ)^k | x` in `Z[ζ]`.
pub fn one_minus_zeta_valuation(x: &CycElem, cap: u32) -> Result<u32> {
    if x.is_zero() {
        return Err(domain!("the valuation of 0 is infinite"));
    }
    if !x.is_integral() {
        return Err(domain!("valuation expects an element of Z[zeta]"));
    }
    let inv = one_minus_zeta_pow(x.t, 1)?.inverse()?;
    let mut k = 0;
    let mut cur = x.clone();
    while k < cap {
        let next = &cur * &inv;
        if !next.is_integral() {
            break;
        }
        cur = next;
        k += 1;
    }
    Ok(k)
}

/// `(1 - ζ)^k | x`, treating 0 as divisible by everything.
fn divisible_by_one_minus_zeta(x: &CycElem, k: u32) -> Result<bool> {
    if x.is_zero() {
        return Ok(true);
    }
    Ok(one_minus_zeta_valuation(x, k)? >= k)
}

/// Checks that `t / λ^{(t-1)/2}` is a real unit of `Z[ζ]`.
pub fn verify_t_over_lambda_unit(t: u64) -> Result<bool> {
    check_t(t)?;
    let denom = lambda(t)?.pow((t as u32 - 1) / 2);
    let q = CycElem::from_int(t, t)?.try_div(&denom)?;
    Ok(q.is_integral() && q.is_real() && q.is_unit()?)
}

/// Checks that `δ' = λ(λ_a⁻¹ - λ_b⁻¹)` matches the closed form
/// `λ(ζ^{-b} - ζ^{-a})(ζ^{a+b} - 1)/(λ_a λ_b)` and is a real unit.
pub fn verify_delta_unit(t: u64, a: i64, b: i64) -> Result<bool> {
    check_t(t)?;
    let ti = t as i64;
    if !(1..ti).contains(&a) || !(1..ti).contains(&b) {
        return Err(domain!("a = {a}, b = {b} must lie in [1, t-1]"));
    }
    if (a - b).rem_euclid(ti) == 0 || (a + b).rem_euclid(ti) == 0 {
        return Err(domain!("b = {b} is congruent to ±a = ±{a} mod {t}"));
    }
    let la = lambda_a(t, a)?;
    let lb = lambda_a(t, b)?;
    let lam = lambda(t)?;
    let diff = la.inverse()?.try_sub(&lb.inverse()?)?;
    let delta = &lam * &diff;

    let numerator = &(&CycElem::zeta_pow(t, -b)? - &CycElem::zeta_pow(t, -a)?)
        * &(&CycElem::zeta_pow(t, a + b)? - &CycElem::one(t)?);
    let closed = numerator.try_div(&(&la * &lb))?;
    if closed != diff {
        return Ok(false);
    }
    Ok(delta.is_integral() && delta.is_real() && delta.is_unit()?)
}

/// How a prime `l ≠ t` decomposes in `Z[ζ_t]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingData {
    pub l: u64,
    pub t: u64,
    pub residue_degree_f: u64,
    pub num_primes_g: u64,
    pub conjugation_in_decomposition: bool,
}

pub fn splitting_data(l: u64, t: u64) -> Result<SplittingData> {
    if l == t {
        return Err(domain!("l = t is ramified"));
    }
    if !arith::is_prime_u(l) || !arith::is_prime_u(t) {
        return Err(domain!("l = {l} and t = {t} must both be prime"));
    }
    let f = modgroup::mult_order(&BigInt::from(l), t)?;
    Ok(SplittingData {
        l,
        t,
        residue_degree_f: f,
        num_primes_g: (t - 1) / f,
        // Frobenius generates the decomposition group, so it holds ζ ↦ ζ^{-1}
        // exactly when -1 is a power of l mod t.
        conjugation_in_decomposition: f % 2 == 0,
    })
}

/// `(x^t + y^t) / (x + y)`, exact.
pub fn cyclotomic_cofactor(t: u64, x: i64, y: i64) -> Result<BigInt> {
    if x.checked_add(y) == Some(0) {
        return Err(domain!("x + y must be nonzero"));
    }
    let (bx, by) = (BigInt::from(x), BigInt::from(y));
    let t = t as usize;
    let num = num_traits::pow(bx.clone(), t) + num_traits::pow(by.clone(), t);
    let den = bx + by;
    let (q, r) = num.div_rem(&den);
    debug_assert!(r.is_zero());
    Ok(q)
}

/// Whether `l ∤ (x^t + y^t)/(x + y)` under the hypothesis `-1 ∈ <l mod t>`.
pub fn cofactor_coprime_check(t: u64, l: u64, x: i64, y: i64) -> Result<bool> {
    check_t(t)?;
    if l == t || !arith::is_prime_u(l) {
        return Err(domain!("l = {l} must be a prime different from t = {t}"));
    }
    if x.gcd(&y) != 1 {
        return Err(domain!("x = {x} and y = {y} must be coprime"));
    }
    if !modgroup::contains_minus_one(&BigInt::from(l), t)? {
        return Err(domain!("-1 is not in <{l} mod {t}>"));
    }
    let cofactor = cyclotomic_cofactor(t, x, y)?;
    Ok(!(cofactor % BigInt::from(l)).is_zero())
}

/// For `t | x + y`, checks that `α = (x + ζy)/(1 - ζ)` is integral,
/// `α ≡ -y` and `ᾱ ≡ α` modulo `(1 - ζ)²`.
pub fn alpha_congruence_check(t: u64, x: i64, y: i64) -> Result<bool> {
    check_t(t)?;
    if x.gcd(&y) != 1 {
        return Err(domain!("x = {x} and y = {y} must be coprime"));
    }
    let sum = x as i128 + y as i128;
    if sum == 0 {
        return Err(domain!("x + y must be nonzero"));
    }
    if sum % t as i128 != 0 {
        return Err(domain!("t = {t} must divide x + y = {sum}"));
    }
    let zeta = CycElem::zeta(t)?;
    let numer = CycElem::from_int(t, x)?.try_add(&zeta.scale(&Rat::from_integer(y.into())))?;
    let alpha = numer.try_div(&one_minus_zeta_pow(t, 1)?)?;
    if !alpha.is_integral() {
        return Ok(false);
    }
    let shifted = alpha.try_add(&CycElem::from_int(t, y)?)?;
    let conj_gap = alpha.conj().try_sub(&alpha)?;
    Ok(divisible_by_one_minus_zeta(&shifted, 2)? && divisible_by_one_minus_zeta(&conj_gap, 2)?)
}

/// Every valid ordered pair `(a, b)` for [`verify_delta_unit`].
pub fn delta_pairs(t: u64) -> Vec<(i64, i64)> {
    let ti = t as i64;
    let mut out = Vec::new();
    for a in 1..ti {
        for b in 1..ti {
            if (a - b).rem_euclid(ti) != 0 && (a + b).rem_euclid(ti) != 0 {
                out.push((a, b));
            }
        }
    }
    out
}
