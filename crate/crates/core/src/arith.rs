//! Exact integer arithmetic, primality screening, and prime tables.
//!
//! Everything here is deterministic and overflow-free at any magnitude the
//! engine touches (moduli around 2^160). All functions are pure; a
//! [`PrimeTable`] is immutable after construction and can be shared freely
//! across threads.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use thiserror::Error;

/// Arbitrary-precision non-negative integer used throughout the engine.
pub type Natural = BigUint;

#[derive(Debug, Error)]
pub enum ArithError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(Natural),
    #[error("prime table limit {limit} exceeds the supported cap {cap}")]
    TableLimitExceeded { limit: u64, cap: u64 },
}

/// Largest `primes_up_to` limit honored before reporting a resource error.
/// At this cap the table holds ~98M primes (< 800 MB of u64), well inside a
/// small-machine budget while comfortably covering the required 10^8.
pub const PRIME_TABLE_CAP: u64 = 2_000_000_000;

/// First 13 primes: strong-pseudoprime tests to these bases are a
/// deterministic primality proof for all n below [`mr_deterministic_limit`].
const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// 3,317,044,064,679,887,385,961,981 (Sorenson & Webster): below this,
/// the 13 fixed bases above decide primality exactly.
pub fn mr_deterministic_limit() -> &'static Natural {
    static LIMIT: OnceLock<Natural> = OnceLock::new();
    LIMIT.get_or_init(|| {
        Natural::parse_bytes(b"3317044064679887385961981", 10).unwrap()
    })
}

/// base^exp mod modulus, exact. Errors if modulus < 2.
pub fn pow_mod(base: &Natural, exp: &Natural, modulus: &Natural) -> Result<Natural, ArithError> {
    if modulus < &Natural::from(2u32) {
        return Err(ArithError::ModulusTooSmall(modulus.clone()));
    }
    Ok(base.modpow(exp, modulus))
}

/// One strong-pseudoprime round: n-1 = d·2^s with d odd, base already
/// reduced and nonzero mod n. Returns false only if n is proven composite.
fn strong_round(n: &Natural, n_minus_1: &Natural, d: &Natural, s: u64, base: &Natural) -> bool {
    let mut x = base.modpow(d, n);
    if x.is_one() || &x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if &x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Strong-pseudoprime test to `rounds` bases, default base schedule.
///
/// Bases are the first min(rounds, 13) fixed small primes; for n below the
/// deterministic limit the answer is exact and extra rounds add nothing.
/// Above the limit, rounds beyond 13 draw uniform random bases from a fixed
/// seed so results stay reproducible. `false` is always backed by a
/// witnessed composite; rounds = 1 keeps the classic base-2 pseudoprimes
/// (2047 reports true).
pub fn is_probable_prime(n: &Natural, rounds: u32) -> bool {
    is_probable_prime_seeded(n, rounds, 0)
}

/// Same as [`is_probable_prime`] with an explicit seed for the random bases
/// used above the deterministic limit. Runs are replayable given the seed.
pub fn is_probable_prime_seeded(n: &Natural, rounds: u32, seed: u64) -> bool {
    assert!(rounds >= 1, "at least one round required");
    let two = Natural::from(2u32);
    if n < &two {
        return false;
    }
    if n == &two || n == &Natural::from(3u32) {
        return true;
    }
    if !n.bit(0) {
        return false;
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap();
    let d = &n_minus_1 >> s;

    let deterministic = n < mr_deterministic_limit();
    let fixed = (rounds as usize).min(MR_BASES.len());
    for &b in &MR_BASES[..fixed] {
        let base = Natural::from(b) % n;
        if base.is_zero() {
            continue; // n equals a tiny base prime; handled by n itself being prime
        }
        if !strong_round(n, &n_minus_1, &d, s, &base) {
            return false;
        }
    }
    if deterministic || rounds as usize <= MR_BASES.len() {
        return true;
    }
    // Extra random bases only matter beyond the deterministic range.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6761_7066_6f72_6765);
    let lo = two;
    let hi = n - 1u32; // exclusive
    for _ in 0..(rounds as usize - MR_BASES.len()) {
        let base = rng.gen_biguint_range(&lo, &hi);
        if !strong_round(n, &n_minus_1, &d, s, &base) {
            return false;
        }
    }
    true
}

/// Floor square root with the defining inequality re-checked on the result:
/// r² ≤ n < (r+1)². The check is cheap next to the root itself and removes
/// any trust in the rounding of the underlying iteration.
pub fn isqrt(n: &Natural) -> Natural {
    let mut r = n.sqrt();
    while &r * &r > *n {
        r -= 1u32;
    }
    loop {
        let next = &r + 1u32;
        if &next * &next > *n {
            break;
        }
        r = next;
    }
    r
}

/// Floor cube root, verified the same way: r³ ≤ n < (r+1)³.
pub fn icbrt(n: &Natural) -> Natural {
    let mut r = n.cbrt();
    while &r * &r * &r > *n {
        r -= 1u32;
    }
    loop {
        let next = &r + 1u32;
        if &next * &next * &next > *n {
            break;
        }
        r = next;
    }
    r
}

/// Exact square detector: Some(root) iff n = root².
pub fn is_perfect_square(n: &Natural) -> Option<Natural> {
    // Squares mod 64 are sparse; the residue test rejects most inputs
    // without a root extraction.
    const SQUARE_MOD_64: [bool; 64] = {
        let mut t = [false; 64];
        let mut i = 0;
        while i < 64 {
            t[(i * i) % 64] = true;
            i += 1;
        }
        t
    };
    let low = (n % 64u32).to_u8().unwrap();
    if !SQUARE_MOD_64[low as usize] {
        return None;
    }
    let r = isqrt(n);
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Smallest prime strictly greater than x.
///
/// Primality is decided by the deterministic 13-base test, exact for every
/// value below ~3.3·10^24; the engine only requests moduli near the cube
/// root of the numbers under test, far inside that range.
pub fn next_prime_above(x: &Natural) -> Natural {
    let mut c = x + 1u32;
    let two = Natural::from(2u32);
    if c <= two {
        return two;
    }
    if !c.bit(0) {
        c += 1u32;
    }
    loop {
        if is_probable_prime(&c, MR_BASES.len() as u32) {
            return c;
        }
        c += 2u32;
    }
}

/// Complete ascending table of the primes ≤ limit.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Membership for p ≤ limit (complete-table invariant).
    pub fn contains(&self, p: u64) -> bool {
        debug_assert!(p <= self.limit);
        self.primes.binary_search(&p).is_ok()
    }

    /// Primes in [lo, hi) as a subslice.
    pub fn range(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.primes.partition_point(|&p| p < lo);
        let b = self.primes.partition_point(|&p| p < hi);
        &self.primes[a..b]
    }
}

/// Simple odds-only sieve for the base primes up to `limit` (inclusive).
fn small_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    // is_composite[i] describes the odd number 2i+1; index 0 is 1.
    let mut is_composite = vec![false; n / 2 + 1];
    let mut primes = vec![2u64];
    let mut i = 1usize;
    loop {
        let p = 2 * i + 1;
        if p * p > n {
            break;
        }
        if !is_composite[i] {
            let mut j = (p * p) / 2;
            while j <= n / 2 {
                is_composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    for k in 1..=n / 2 {
        let p = 2 * k + 1;
        if p <= n && !is_composite[k] {
            primes.push(p as u64);
        }
    }
    primes
}

const SEGMENT_SPAN: u64 = 1 << 21; // odd numbers per segment: 2^20

/// Segmented odds-only Eratosthenes visiting every prime ≤ limit in order.
///
/// Memory stays at one segment bitmap plus the base primes up to √limit,
/// so oracle sums over primes up to 10^8..10^9 never materialize a table.
pub fn for_each_prime_below(limit: u64, mut f: impl FnMut(u64)) {
    if limit < 2 {
        return;
    }
    let root = (limit as f64).sqrt() as u64 + 2;
    let base = small_sieve(root.min(limit));
    for &p in &base {
        if p <= limit {
            f(p);
        }
    }
    let mut lo = root.min(limit) + 1;
    if lo % 2 == 0 {
        lo += 1;
    }
    let mut seg = vec![false; (SEGMENT_SPAN / 2) as usize];
    while lo <= limit {
        let hi = (lo + SEGMENT_SPAN - 2).min(limit); // inclusive, odd span
        let half = ((hi - lo) / 2 + 1) as usize;
        seg[..half].fill(false);
        for &p in base.iter().skip(1) {
            // first odd multiple of p at or above max(p², lo)
            let p2 = p * p;
            if p2 > hi {
                break;
            }
            let mut start = if p2 >= lo { p2 } else { lo.div_ceil(p) * p };
            if start % 2 == 0 {
                start += p;
            }
            let mut idx = (start - lo) / 2;
            while idx < half as u64 {
                seg[idx as usize] = true;
                idx += p;
            }
        }
        for (i, &c) in seg[..half].iter().enumerate() {
            if !c {
                f(lo + 2 * i as u64);
            }
        }
        lo = hi + 2;
    }
}

/// Build the complete prime table up to `limit` (≥ 2). Limits above
/// [`PRIME_TABLE_CAP`] are refused rather than thrashing memory.
pub fn primes_up_to(limit: u64) -> Result<PrimeTable, ArithError> {
    assert!(limit >= 2, "prime table needs limit >= 2");
    if limit > PRIME_TABLE_CAP {
        return Err(ArithError::TableLimitExceeded {
            limit,
            cap: PRIME_TABLE_CAP,
        });
    }
    let mut primes = Vec::new();
    for_each_prime_below(limit, |p| primes.push(p));
    Ok(PrimeTable { limit, primes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn pow_mod_examples() {
        assert_eq!(pow_mod(&nat(3), &nat(4), &nat(5)).unwrap(), nat(1));
        assert_eq!(pow_mod(&nat(2), &nat(22), &nat(23)).unwrap(), nat(1));
        // 1541 = 23*67 is composite, so Fermat with base 2 must fail.
        assert_ne!(pow_mod(&nat(2), &nat(1540), &nat(1541)).unwrap(), nat(1));
        assert!(pow_mod(&nat(3), &nat(4), &nat(1)).is_err());
        assert!(pow_mod(&nat(3), &nat(4), &nat(0)).is_err());
    }

    #[test]
    fn pow_mod_matches_repeated_multiplication() {
        // Exhaustive small grid against the naive ladder.
        for a in 0u64..=40 {
            for e in 0u64..=40 {
                for m in 2u64..=40 {
                    let mut acc = 1u64;
                    for _ in 0..e {
                        acc = acc * a % m;
                    }
                    assert_eq!(
                        pow_mod(&nat(a), &nat(e), &nat(m)).unwrap(),
                        nat(acc),
                        "a={a} e={e} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn probable_prime_examples() {
        assert!(!is_probable_prime(&nat(1), 5));
        assert!(is_probable_prime(&nat(97), 5));
        // 2047 = 23*89 is the smallest base-2 strong pseudoprime.
        assert!(is_probable_prime(&nat(2047), 1));
        assert!(!is_probable_prime(&nat(2047), 2));
    }

    #[test]
    fn probable_prime_matches_trial_division_to_1e5() {
        // The 10^6 exhaustive check lives in the integration suite; this
        // keeps a fast inline guard.
        let table = primes_up_to(100_000).unwrap();
        let mut idx = 0usize;
        for n in 0u64..=100_000 {
            let expect = table.primes().get(idx) == Some(&n);
            if expect {
                idx += 1;
            }
            assert_eq!(is_probable_prime(&nat(n), 20), expect, "n={n}");
        }
    }

    #[test]
    fn perfect_square_examples() {
        assert_eq!(is_perfect_square(&nat(0)), Some(nat(0)));
        assert_eq!(is_perfect_square(&nat(4)), Some(nat(2)));
        assert_eq!(is_perfect_square(&nat(2047)), None);
        let big = Natural::parse_bytes(b"123456789123456789", 10).unwrap();
        assert_eq!(is_perfect_square(&(&big * &big)), Some(big.clone()));
        assert_eq!(is_perfect_square(&(&big * &big + 1u32)), None);
    }

    #[test]
    fn next_prime_examples() {
        assert_eq!(next_prime_above(&nat(0)), nat(2));
        assert_eq!(next_prime_above(&nat(1)), nat(2));
        assert_eq!(next_prime_above(&nat(2)), nat(3));
        assert_eq!(next_prime_above(&nat(10)), nat(11));
        assert_eq!(next_prime_above(&nat(110)), nat(113));
        assert_eq!(next_prime_above(&nat(113)), nat(127));
    }

    #[test]
    fn prime_table_examples() {
        let t = primes_up_to(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        let t = primes_up_to(100).unwrap();
        assert_eq!(t.len(), 25);
        let t = primes_up_to(2).unwrap();
        assert_eq!(t.primes(), &[2]);
        assert!(primes_up_to(PRIME_TABLE_CAP + 1).is_err());
    }

    #[test]
    fn prime_table_matches_reference_counts() {
        // pi(10^k) reference values.
        let t = primes_up_to(1_000_000).unwrap();
        assert_eq!(t.len(), 78_498);
        assert_eq!(t.range(0, 1_000).len(), 168);
        assert_eq!(t.range(0, 10_000).len(), 1_229);
        assert_eq!(t.range(0, 100_000).len(), 9_592);
        assert_eq!(*t.primes().last().unwrap(), 999_983);
    }

    #[test]
    fn segmented_iteration_agrees_with_table() {
        let t = primes_up_to(300_000).unwrap();
        let mut seen = Vec::new();
        for_each_prime_below(300_000, |p| seen.push(p));
        assert_eq!(seen, t.primes());
    }

    #[test]
    fn isqrt_and_icbrt_are_exact_floors() {
        for n in 0u64..5_000 {
            let r = isqrt(&nat(n));
            let r64 = r.to_u64().unwrap();
            assert!(r64 * r64 <= n && (r64 + 1) * (r64 + 1) > n, "n={n}");
            let c = icbrt(&nat(n));
            let c64 = c.to_u64().unwrap();
            assert!(c64.pow(3) <= n && (c64 + 1).pow(3) > n, "n={n}");
        }
    }
}
