//! Computations in `(Z/t)^×` and `(Z/t²)^×`.
//!
//! Membership of `-1` in `<l mod t>` is decided by the parity of the order of
//! `l`: the group is cyclic, so `-1` is its unique element of order two and
//! lies in a cyclic subgroup exactly when that subgroup has even order.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, mod_floor, pow_mod, pow_mod_u64};
use crate::error::{domain, Result};

/// How the prime `l` sits in `(Z/t)^×`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupCondition {
    pub l: u64,
    pub t: u64,
    pub order: u64,
    pub contains_minus_one: bool,
    pub is_nonresidue: bool,
}

fn check_unit_mod_prime(l: &BigInt, t: u64) -> Result<u64> {
    if !arith::is_prime_u(t) {
        return Err(domain!("modulus {t} is not prime"));
    }
    let residue = mod_floor(l, &BigInt::from(t)).to_u64().unwrap();
    if residue == 0 {
        return Err(domain!("{t} divides {l}"));
    }
    Ok(residue)
}

/// Distinct prime divisors of a small positive integer.
fn small_prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order of `l` modulo the prime `t`.
pub fn mult_order(l: &BigInt, t: u64) -> Result<u64> {
    let residue = check_unit_mod_prime(l, t)?;
    let mut order = t - 1;
    for q in small_prime_divisors(t - 1) {
        while order % q == 0 && pow_mod_u64(residue, order / q, t) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

/// Whether `-1 mod t` lies in the subgroup generated by `l mod t`.
pub fn contains_minus_one(l: &BigInt, t: u64) -> Result<bool> {
    Ok(mult_order(l, t)? % 2 == 0)
}

/// Whether `l mod t` is a quadratic nonresidue (Euler's criterion).
pub fn is_nonresidue(l: &BigInt, t: u64) -> Result<bool> {
    if t == 2 {
        return Err(domain!("is_nonresidue needs an odd prime modulus"));
    }
    let residue = check_unit_mod_prime(l, t)?;
    Ok(pow_mod_u64(residue, (t - 1) / 2, t) == t - 1)
}

pub fn subgroup_condition(l: u64, t: u64) -> Result<SubgroupCondition> {
    let lb = BigInt::from(l);
    let order = mult_order(&lb, t)?;
    Ok(SubgroupCondition {
        l,
        t,
        order,
        contains_minus_one: order % 2 == 0,
        is_nonresidue: is_nonresidue(&lb, t)?,
    })
}

fn t_squared(t: u64) -> BigInt {
    let t = BigInt::from(t);
    &t * &t
}

/// `r^(t-1) mod t²`, rejecting `t | r`.
pub fn fermat_residue(r: &BigInt, t: u64) -> Result<BigInt> {
    if t < 2 {
        return Err(domain!("modulus {t} is too small"));
    }
    if mod_floor(r, &BigInt::from(t)).is_zero() {
        return Err(domain!("{t} divides {r}"));
    }
    Ok(pow_mod(r, &BigInt::from(t - 1), &t_squared(t)))
}

/// Whether `r^(t-1) ≡ 1 mod t²`, i.e. the Fermat quotient of `r` vanishes.
pub fn fermat_quotient_is_trivial(r: &BigInt, t: u64) -> Result<bool> {
    Ok(fermat_residue(r, t)?.is_one())
}

/// Whether `B^(t-1) ≢ 2^(t-1) mod t²`.
pub fn b_vs_two_condition(b: &BigInt, t: u64) -> Result<bool> {
    let lhs = fermat_residue(b, t)?;
    let rhs = fermat_residue(&BigInt::from(2), t)?;
    Ok(lhs != rhs)
}
