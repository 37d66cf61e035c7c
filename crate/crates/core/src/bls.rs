//! Cube-root N−1 primality certificates.
//!
//! Given n with a known prime r | n−1 and r³ > n, a single Fermat witness
//! plus a gcd condition forces every prime factor of n to be ≡ 1 (mod r).
//! A composite n would then factor as (x·r+1)(y·r+1) with x, y ≥ 1 and
//! x·y < r, which a two-branch quadratic check either exhibits or rules
//! out. The resulting certificate re-verifies with two modular
//! exponentiations and two discriminant tests, no search.

use crate::arith::{is_perfect_square, is_probable_prime, Natural};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlsError {
    #[error("n must be odd and at least 3, got {0}")]
    BadN(Natural),
    #[error("helper {0} is not prime")]
    HelperNotPrime(Natural),
    #[error("helper {r} does not divide n-1 for n = {n}")]
    HelperNotDivisor { r: Natural, n: Natural },
    #[error("helper cube {r}^3 must exceed n = {n}")]
    HelperTooSmall { r: Natural, n: Natural },
}

pub(crate) mod dec_nat {
    use super::Natural;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Natural, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Natural, D::Error> {
        let s = String::deserialize(d)?;
        Natural::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| de::Error::custom(format!("invalid natural {s:?}")))
    }
}

mod dec_int {
    use num_bigint::BigInt;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| de::Error::custom(format!("invalid integer {s:?}")))
    }
}

/// One quadratic branch: s = c₁ + j·r and p2 = c₂ − j are the candidate
/// values of x+y and x·y for a hypothetical factorization
/// n = (x·r+1)(y·r+1); `square` records whether s² − 4·p2 was a perfect
/// square. p2 can be −1 on the carry branch, hence the signed type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCheck {
    pub j: u8,
    #[serde(with = "dec_nat")]
    pub s: Natural,
    #[serde(with = "dec_int")]
    pub p2: BigInt,
    pub square: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeCertificate {
    #[serde(with = "dec_nat")]
    pub n: Natural,
    #[serde(with = "dec_nat")]
    pub r: Natural,
    #[serde(with = "dec_nat")]
    pub witness: Natural,
    #[serde(with = "dec_nat")]
    pub quotient: Natural,
    pub branches: Vec<BranchCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertifyOutcome {
    Certified(PrimeCertificate),
    /// f1·f2 = n with 1 < f1 ≤ f2 < n, verified by multiplication.
    CompositeWithFactors(Natural, Natural),
    Unproven(String),
}

fn order_factors(n: &Natural, g: Natural) -> (Natural, Natural) {
    let other = n / &g;
    if g <= other {
        (g, other)
    } else {
        (other, g)
    }
}

/// Evaluate both quadratic branches for (n, r). Returns the branch records
/// and, if some branch yields roots x, y ≥ 1 whose reassembled product
/// equals n, the factor pair.
///
/// Why two branches suffice: any factorization n = (x·r+1)(y·r+1) gives
/// n−1 = r·(x·y·r + x + y), so Q = (n−1)/r splits as x·y·r + (x+y) with
/// x·y < r (from r³ > n) and x+y ≤ x·y+1 ≤ r; writing Q = c₂·r + c₁ the
/// carry from x+y into c₂ is therefore 0 or 1. Each candidate (s, p2) is
/// only accepted after the product check, so a branch can never produce a
/// wrong factorization.
pub fn branch_factor_search(
    n: &Natural,
    r: &Natural,
) -> (Vec<BranchCheck>, Option<(Natural, Natural)>) {
    let q = (n - 1u32) / r;
    let c1 = &q % r;
    let c2 = &q / r;
    let mut branches = Vec::with_capacity(2);
    let mut factors = None;
    for j in 0u8..=1 {
        let s = &c1 + r * Natural::from(j);
        let p2 = BigInt::from(c2.clone()) - BigInt::from(j);
        let disc = BigInt::from(&s * &s) - BigInt::from(4) * &p2;
        let mut square = false;
        if !disc.is_negative() {
            if let Some(d) = is_perfect_square(disc.magnitude()) {
                square = true;
                if factors.is_none() {
                    // roots x=(s−d)/2, y=(s+d)/2 share parity with s by
                    // disc ≡ s² (mod 4); x ≥ 1 means s − d ≥ 2
                    let s_i = BigInt::from(s.clone());
                    let d_i = BigInt::from(d);
                    let twice_x = &s_i - &d_i;
                    if twice_x >= BigInt::from(2) && twice_x.is_even() {
                        let x = (twice_x >> 1u32).to_biguint().unwrap();
                        let y = ((s_i + d_i) >> 1u32).to_biguint().unwrap();
                        let f1 = &x * r + 1u32;
                        let f2 = &y * r + 1u32;
                        if &f1 * &f2 == *n {
                            factors = Some(order_factors(n, f1));
                        }
                    }
                }
            }
        }
        branches.push(BranchCheck { j, s, p2, square });
    }
    (branches, factors)
}

/// Full certification: witness search, then branch factor exclusion.
///
/// A base whose gcd test lands strictly between 1 and n already exhibits a
/// factor, so the search short-circuits to CompositeWithFactors there.
/// Fermat failures and gcd = n both just disqualify the base; with no
/// usable witness below the limit the outcome is Unproven (the caller may
/// escalate), never a factor-free composite claim.
pub fn bls_certify(
    n: &Natural,
    r: &Natural,
    witness_limit: u64,
) -> Result<CertifyOutcome, BlsError> {
    if *n < Natural::from(3u32) || !n.bit(0) {
        return Err(BlsError::BadN(n.clone()));
    }
    if !is_probable_prime(r, 13) {
        return Err(BlsError::HelperNotPrime(r.clone()));
    }
    let n1 = n - 1u32;
    if !(&n1 % r).is_zero() {
        return Err(BlsError::HelperNotDivisor {
            r: r.clone(),
            n: n.clone(),
        });
    }
    if r.pow(3) <= *n {
        return Err(BlsError::HelperTooSmall {
            r: r.clone(),
            n: n.clone(),
        });
    }
    let q = &n1 / r;

    let mut witness = None;
    for a in 2..=witness_limit {
        let base = Natural::from(a);
        if base >= *n {
            break;
        }
        if !base.modpow(&n1, n).is_one() {
            continue;
        }
        let t = base.modpow(&q, n);
        let t_minus_1 = if t.is_zero() { &n1 % n } else { t - 1u32 };
        let g = t_minus_1.gcd(n);
        if g.is_one() {
            witness = Some(base);
            break;
        }
        if g > Natural::one() && g < *n {
            let (f1, f2) = order_factors(n, g);
            return Ok(CertifyOutcome::CompositeWithFactors(f1, f2));
        }
    }
    let Some(witness) = witness else {
        return Ok(CertifyOutcome::Unproven(format!(
            "no witness found among bases 2..={witness_limit}"
        )));
    };

    let (branches, factors) = branch_factor_search(n, r);
    if let Some((f1, f2)) = factors {
        return Ok(CertifyOutcome::CompositeWithFactors(f1, f2));
    }
    Ok(CertifyOutcome::Certified(PrimeCertificate {
        n: n.clone(),
        r: r.clone(),
        witness,
        quotient: q,
        branches,
    }))
}

/// Recompute every certificate invariant from scratch. Any tampering —
/// wrong helper, wrong witness, altered branch data, missing branch —
/// returns false; nothing here can panic on hostile input.
pub fn verify_certificate(cert: &PrimeCertificate) -> bool {
    let n = &cert.n;
    if *n < Natural::from(3u32) || !n.bit(0) {
        return false;
    }
    let r = &cert.r;
    if !is_probable_prime(r, 13) {
        return false;
    }
    let n1 = n - 1u32;
    if !(&n1 % r).is_zero() || r.pow(3) <= *n {
        return false;
    }
    let q = &n1 / r;
    if cert.quotient != q {
        return false;
    }
    if cert.witness >= *n || cert.witness < Natural::from(2u32) {
        return false;
    }
    if !cert.witness.modpow(&n1, n).is_one() {
        return false;
    }
    let t = cert.witness.modpow(&q, n);
    let t_minus_1 = if t.is_zero() { &n1 % n } else { t - 1u32 };
    if !t_minus_1.gcd(n).is_one() {
        return false;
    }

    let (expected, factors) = branch_factor_search(n, r);
    if factors.is_some() {
        // a recoverable factorization exists; n is composite
        return false;
    }
    cert.branches == expected
}
