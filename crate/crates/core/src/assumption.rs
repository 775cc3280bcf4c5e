use serde::{Deserialize, Serialize};

/// An input the crate does not compute but imports from the literature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumption {
    pub id: String,
    pub statement: String,
    pub source: String,
}

/// Largest exponent (exclusive) for which `t ∤ h_t⁺` has been verified.
pub const VANDIVER_VERIFIED_BOUND: u64 = 7_000_000;

/// Largest exponent (exclusive) for which `t³ ∤ B_{2nt}` has been verified in
/// the literature. Informational: the crate recomputes this condition itself.
pub const BERNOULLI_CUBE_VERIFIED_BOUND: u64 = 12_000_000;

pub fn vandiver(t: u64) -> Assumption {
    Assumption {
        id: "vandiver-range".into(),
        statement: format!(
            "t = {t} does not divide the class number h_t+ of Q(zeta_t + zeta_t^-1); \
             not computed here, imported from the verified range t < {VANDIVER_VERIFIED_BOUND}"
        ),
        source: "Buhler et al., irregular prime computations (h_t+ condition verified for t < 7*10^6)"
            .into(),
    }
}

pub fn bennett_theorem() -> Assumption {
    Assumption {
        id: "bennett-4.1".into(),
        statement: "if t does not divide Z, B*phi(B) is prime to t, B^(t-1) != 2^(t-1) mod t^2 \
                    and some divisor r of B has r^(t-1) != 1 mod t^2, then \
                    X^t + Y^t = B Z^t has no pairwise coprime nonzero solution"
            .into(),
        source: "Bennett et al., Theorem 4.1".into(),
    }
}
