//! Window verification for the Mertens-type inequality
//!
//! ```text
//!     prod_{u <= p < z, p ∤ Q} (1 - 1/p)^{-1}  <  (1 + eps) ln z / ln u
//! ```
//!
//! over every real u in [u_min, z) and every real z in [z_lo, z_hi].
//!
//! The left side only changes when u crosses a prime it retains or z
//! crosses a prime it absorbs, so the claim over a real rectangle
//! reduces to finitely many critical pairs:
//!
//! * in u the product is constant on (p_{i-1}, p_i] while the right side
//!   decreases, so the worst u of each piece is the prime p_i, attained;
//! * in z the product is constant on (p_j, p_{j+1}] while the right side
//!   increases, so the worst z of each piece is the infimum z -> p_j+,
//!   never attained inside the piece;
//! * the first partial piece keeps its left endpoint z = z_lo, attained.
//!
//! Hence the checks split into family (a), the inequality itself at
//! (u = p_i, z = z_lo) for every retained prime p_i < z_lo, and family
//! (b), `lhs <= (1+eps) ln p_j / ln p_i` for retained primes
//! p_i <= p_j, z_lo <= p_j < z_hi, where equality is allowed because the
//! infimum is not attained.  Together the two families cover the
//! rectangle exactly, not merely sufficiently.
//!
//! The scan itself runs on outward-rounded prefix products, so a pass is
//! a proof.  Pairs the float scan cannot settle are retried with exact
//! rational arithmetic: the product as an explicit fraction against
//! two-sided rational enclosures of the logarithms, tightened until the
//! sides separate.  Refutations always carry a concrete witness point
//! that has itself been re-verified exactly.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EstimateError;
use crate::arith::{self, Natural};
use crate::bound::{parse_decimal_rational, step_down, step_up, Bound};

mod rat_str {
    use super::{parse_ratio, BigRational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).ok_or_else(|| de::Error::custom(format!("invalid rational {s:?}")))
    }
}

/// Parses `a/b` fractions as well as plain decimal or scientific
/// notation (`0.00197`, `1.97e-3`), all exactly.
pub fn parse_ratio(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(BigRational::new(num, den))
    } else {
        parse_decimal_rational(t)
    }
}

/// Outcome of a window check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowStatus {
    /// Every critical pair satisfies the inequality.
    Verified,
    /// A concrete failing point; u is always a prime, z may be rational
    /// when the failure hugs a piece boundary.
    Refuted {
        #[serde(with = "crate::bls::dec_nat")]
        u: Natural,
        #[serde(with = "rat_str")]
        z: BigRational,
    },
    /// Not checked yet, or a pair the exact recheck could not separate
    /// within its precision budget.
    Pending,
}

/// One rectangular claim: z in [z_lo, z_hi], u in [u_min, z), with the
/// primes dividing `q_excluded` left out of the product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsWindow {
    #[serde(with = "crate::bls::dec_nat")]
    pub z_lo: Natural,
    #[serde(with = "crate::bls::dec_nat")]
    pub z_hi: Natural,
    #[serde(with = "crate::bls::dec_nat")]
    pub u_min: Natural,
    #[serde(with = "rat_str")]
    pub epsilon: BigRational,
    #[serde(with = "crate::bls::dec_nat")]
    pub q_excluded: Natural,
    pub status: WindowStatus,
}

impl EpsWindow {
    pub fn new(
        z_lo: Natural,
        z_hi: Natural,
        u_min: Natural,
        epsilon: BigRational,
        q_excluded: Natural,
    ) -> Self {
        EpsWindow {
            z_lo,
            z_hi,
            u_min,
            epsilon,
            q_excluded,
            status: WindowStatus::Pending,
        }
    }

    fn with_status(&self, status: WindowStatus) -> EpsWindow {
        EpsWindow {
            status,
            ..self.clone()
        }
    }
}

/// Sufficient float test for `end/cum_i < numer / ln_u`, everything
/// positive, cross-multiplied so no division is needed.  One extra ulp
/// on each product keeps it sound under round-to-nearest.
fn certainly_below(end: Bound, ln_u: Bound, numer: Bound, cum_i: Bound) -> bool {
    step_up(end.hi() * ln_u.hi(), 1) < step_down(numer.lo() * cum_i.lo(), 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairDecision {
    Safe,
    Violated,
    Unresolved,
}

const LN_TERM_LADDER: [usize; 4] = [48, 96, 192, 448];

/// `x` as `base^k` for a whole k >= 1, if it is one.
fn rational_power_of(base: u64, x: &BigRational) -> Option<u64> {
    debug_assert!(base >= 2);
    if !x.is_integer() || x.is_negative() {
        return None;
    }
    let target = x.numer().magnitude();
    let b = BigUint::from(base);
    let mut acc = b.clone();
    let mut k = 1u64;
    while &acc < target {
        acc *= &b;
        k += 1;
    }
    (&acc == target).then_some(k)
}

/// atanh(t) for rational t in [0, 1/2) as a two-sided enclosure: the
/// partial sum of t^{2k+1}/(2k+1), plus a geometric cap on the tail.
fn atanh_bounds(t: &BigRational, terms: usize) -> (BigRational, BigRational) {
    debug_assert!(!t.is_negative());
    let t2 = t * t;
    let mut power = t.clone();
    let mut sum = BigRational::zero();
    for k in 0..terms {
        sum += &power / BigRational::from_integer(BigInt::from(2 * k as u64 + 1));
        power *= &t2;
    }
    // power is now t^{2*terms+1}; the dropped terms are bounded by the
    // geometric series power / ((1 - t^2)(2*terms + 1))
    let tail =
        &power / ((BigRational::one() - &t2) * BigRational::from_integer(BigInt::from(2 * terms as u64 + 1)));
    let hi = &sum + &tail;
    (sum, hi)
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Two-sided rational enclosure of ln x for rational x >= 1, via
/// reduction to m = x/2^e in [1,2), ln m = 2 atanh((m-1)/(m+1)) and
/// ln 2 = 2 atanh(1/3).
fn ln_rat_bounds(x: &BigRational, terms: usize) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    assert!(x >= &one, "ln enclosure needs x >= 1");
    let mut e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut m = x / pow2(e);
    while m >= two {
        m /= &two;
        e += 1;
    }
    while m < one {
        m *= &two;
        e -= 1;
    }
    debug_assert!(e >= 0);
    let t = (&m - &one) / (&m + &one);
    let (a_lo, a_hi) = atanh_bounds(&t, terms);
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    let (h_lo, h_hi) = atanh_bounds(&third, terms);
    let e_r = BigRational::from_integer(BigInt::from(e));
    let lo = (&e_r * h_lo + a_lo) * &two;
    let hi = (&e_r * h_hi + a_hi) * &two;
    (lo, hi)
}

fn rhs_enclosure(
    u: u64,
    z: &BigRational,
    ope: &BigRational,
    terms: usize,
) -> (BigRational, BigRational) {
    let u_rat = BigRational::from_integer(BigInt::from(u));
    let (lu_lo, lu_hi) = ln_rat_bounds(&u_rat, terms);
    let (lz_lo, lz_hi) = ln_rat_bounds(z, terms);
    (ope * lz_lo / lu_hi, ope * lz_hi / lu_lo)
}

/// Exact check at an attained point: the strict inequality
/// `lhs < (1+eps) ln z / ln u` must itself hold there.
fn decide_attained(lhs: &BigRational, u: u64, z: &BigRational, ope: &BigRational) -> PairDecision {
    if let Some(k) = rational_power_of(u, z) {
        // ln z / ln u = k exactly, the one rational case
        let rhs = ope * BigRational::from_integer(BigInt::from(k));
        return if lhs < &rhs {
            PairDecision::Safe
        } else {
            PairDecision::Violated
        };
    }
    for terms in LN_TERM_LADDER {
        let (rhs_lo, rhs_hi) = rhs_enclosure(u, z, ope, terms);
        if lhs < &rhs_lo {
            return PairDecision::Safe;
        }
        if lhs >= &rhs_hi {
            return PairDecision::Violated;
        }
    }
    PairDecision::Unresolved
}

/// Exact check of a piece infimum: safe iff `lhs <= (1+eps) ln p_j / ln u`,
/// equality allowed because z never reaches p_j inside the piece.
fn decide_infimum(lhs: &BigRational, u: u64, p_j: u64, ope: &BigRational) -> PairDecision {
    if p_j == u {
        // single-factor piece, the infimum is 1+eps itself
        return if lhs <= ope {
            PairDecision::Safe
        } else {
            PairDecision::Violated
        };
    }
    // ln p_j / ln u is irrational for distinct primes (p_j^a = u^b would
    // contradict unique factorization), so the enclosures separate
    let z = BigRational::from_integer(BigInt::from(p_j));
    for terms in LN_TERM_LADDER {
        let (rhs_lo, rhs_hi) = rhs_enclosure(u, &z, ope, terms);
        if lhs <= &rhs_lo {
            return PairDecision::Safe;
        }
        if lhs > &rhs_hi {
            return PairDecision::Violated;
        }
    }
    PairDecision::Unresolved
}

/// The product over ps[lo..hi] of p/(p-1) as an exact fraction.
fn lhs_ratio(ps: &[u64], lo: usize, hi: usize) -> BigRational {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for &p in &ps[lo..hi] {
        num *= p;
        den *= p - 1;
    }
    BigRational::new(num.into(), den.into())
}

/// Checks the window claim and returns it with status filled in.
///
/// A `Verified` result is a proof: the fast scan only accepts a pair on
/// a sound outward-rounded comparison, and everything it cannot accept
/// is settled exactly.  A `Refuted` result carries an exactly
/// re-verified witness.  `Pending` means some pair exhausted the exact
/// recheck's precision ladder, which does not occur on sanely separated
/// inputs.
pub fn verify_eps_window(w: &EpsWindow) -> Result<EpsWindow, EstimateError> {
    assert!(w.u_min >= Natural::from(3u32), "u_min must be at least 3");
    assert!(w.z_lo >= w.u_min, "z_lo must be at least u_min");
    assert!(w.z_hi >= w.z_lo, "window must be nonempty");
    assert!(!w.epsilon.is_negative(), "epsilon must be nonnegative");

    let need = w.z_hi.to_u64().unwrap_or(u64::MAX);
    if need > arith::PRIME_TABLE_CAP {
        return Err(EstimateError::TableTooSmall {
            have: arith::PRIME_TABLE_CAP,
            need,
        });
    }
    let z_hi = need;
    let z_lo = w.z_lo.to_u64().expect("z_lo <= z_hi fits");
    let u_min = w.u_min.to_u64().expect("u_min <= z_lo fits");

    let table = arith::primes_up_to(z_hi.max(2)).expect("limit within cap");
    // retained primes: candidates for u and for the product content
    let ps: Vec<u64> = table
        .range(u_min, z_hi)
        .iter()
        .copied()
        .filter(|&p| !(&w.q_excluded % p).is_zero())
        .collect();

    // outward prefix products of p/(p-1), so any piece product is
    // cum[hi]/cum[lo] and stays a true enclosure after one division
    let mut cum = Vec::with_capacity(ps.len() + 1);
    cum.push(Bound::exact(1.0));
    for &p in &ps {
        let factor = Bound::from_u64(p) / Bound::from_u64(p - 1);
        let next = *cum.last().expect("nonempty") * factor;
        cum.push(next);
    }
    let ln_p: Vec<Bound> = ps.iter().map(|&p| Bound::from_u64(p).ln()).collect();

    let k0 = ps.partition_point(|&p| p < z_lo);
    let ope = BigRational::one() + &w.epsilon;
    let ope_b = Bound::exact(1.0) + Bound::from_rational(&w.epsilon);
    let mut pending = false;

    // family (a): z = z_lo attained, u at each retained prime below it
    let numer_a = ope_b * Bound::from_u64(z_lo).ln();
    let z_lo_rat = BigRational::from_integer(BigInt::from(z_lo));
    for i in 0..k0 {
        if certainly_below(cum[k0], ln_p[i], numer_a, cum[i]) {
            continue;
        }
        let lhs = lhs_ratio(&ps, i, k0);
        match decide_attained(&lhs, ps[i], &z_lo_rat, &ope) {
            PairDecision::Safe => {}
            PairDecision::Violated => {
                return Ok(w.with_status(WindowStatus::Refuted {
                    u: Natural::from(ps[i]),
                    z: z_lo_rat,
                }))
            }
            PairDecision::Unresolved => pending = true,
        }
    }

    // family (b): piece infima at z -> p_j+ for p_j in [z_lo, z_hi)
    let mut cands: Vec<(usize, usize)> = (k0..ps.len())
        .into_par_iter()
        .flat_map_iter(|j| {
            let (cum, ln_p) = (&cum, &ln_p);
            let numer = ope_b * ln_p[j];
            let end = cum[j + 1];
            (0..=j).filter_map(move |i| {
                (!certainly_below(end, ln_p[i], numer, cum[i])).then_some((j, i))
            })
        })
        .collect();
    cands.sort_unstable();

    for (j, i) in cands {
        let lhs = lhs_ratio(&ps, i, j + 1);
        match decide_infimum(&lhs, ps[i], ps[j], &ope) {
            PairDecision::Safe => continue,
            PairDecision::Unresolved => {
                pending = true;
                continue;
            }
            PairDecision::Violated => {}
        }
        // the piece is violated arbitrarily close above p_j; walk down
        // p_j + 2^-k until a concrete point violates too (p_j < z_hi,
        // so every such point stays inside the window)
        let p_j = BigRational::from_integer(BigInt::from(ps[j]));
        let mut offset = BigRational::one();
        let two = BigRational::from_integer(BigInt::from(2));
        let mut witness = None;
        for _ in 0..=40 {
            let z_w = &p_j + &offset;
            if decide_attained(&lhs, ps[i], &z_w, &ope) == PairDecision::Violated {
                witness = Some(z_w);
                break;
            }
            offset /= &two;
        }
        match witness {
            Some(z) => {
                return Ok(w.with_status(WindowStatus::Refuted {
                    u: Natural::from(ps[i]),
                    z,
                }))
            }
            None => pending = true,
        }
    }

    let status = if pending {
        WindowStatus::Pending
    } else {
        WindowStatus::Verified
    };
    Ok(w.with_status(status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::mertens_product;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nat(n: u64) -> Natural {
        Natural::from(n)
    }

    fn rat(s: &str) -> BigRational {
        parse_ratio(s).unwrap()
    }

    fn window(z_lo: u64, z_hi: u64, u_min: u64, eps: &str) -> EpsWindow {
        EpsWindow::new(nat(z_lo), nat(z_hi), nat(u_min), rat(eps), nat(2))
    }

    #[test]
    fn ln_enclosure_brackets_reference_logs() {
        // references are 40-digit truncations, so r <= ln x < r + 1e-39
        let cases = [
            ("2", "0.6931471805599453094172321214581765680755"),
            ("3", "1.098612288668109691395245236922525704647"),
            ("10", "2.302585092994045684017991454684364207601"),
            ("11.5", "2.442347035369204381389520710352019550366"),
        ];
        for (x, reference) in cases {
            let x = rat(x);
            let r = rat(reference);
            let (lo, hi) = ln_rat_bounds(&x, 48);
            assert!(r <= hi, "ln {x} enclosure tops out below the reference");
            assert!(lo < &r + rat("1e-39"), "ln {x} enclosure starts too high");
            let width = &hi - &lo;
            assert!(width < rat("1e-30"), "ln {x} enclosure too wide");
        }
        let (lo, hi) = ln_rat_bounds(&BigRational::one(), 8);
        assert!(lo.is_zero() && hi.is_zero());
    }

    #[test]
    fn power_detection_is_exact() {
        assert_eq!(rational_power_of(3, &rat("27")), Some(3));
        assert_eq!(rational_power_of(3, &rat("3")), Some(1));
        assert_eq!(rational_power_of(3, &rat("28")), None);
        assert_eq!(rational_power_of(2, &rat("23/2")), None);
    }

    #[test]
    fn zero_eps_toy_window_is_refuted_at_the_left_edge() {
        // at u = 3, z = 10 the product over {3, 5, 7} is 35/16 = 2.1875,
        // above ln 10 / ln 3 = 2.0959...
        let out = verify_eps_window(&window(10, 20, 3, "0")).unwrap();
        assert_eq!(
            out.status,
            WindowStatus::Refuted {
                u: nat(3),
                z: rat("10")
            }
        );
    }

    #[test]
    fn left_edge_refutation_at_scale() {
        // over [1423, 3948) the product (which retains 3947) exceeds
        // (1 + 1.9e-3) ln 3948 / ln 1423 by about 4.2e-5
        let out = verify_eps_window(&window(3948, 3948, 1423, "1.9e-3")).unwrap();
        assert_eq!(
            out.status,
            WindowStatus::Refuted {
                u: nat(1423),
                z: rat("3948")
            }
        );
        // the same rectangle passes at the production epsilon
        let ok = verify_eps_window(&window(3948, 3948, 1423, "1.97e-3")).unwrap();
        assert_eq!(ok.status, WindowStatus::Verified);
    }

    #[test]
    fn piece_infimum_refutation_finds_integer_witness() {
        // u = 3, piece z in (11, 12]: product 77/32 = 2.40625 sits above
        // 1.01 ln z / ln 3 throughout, already at z = 12
        let out = verify_eps_window(&window(11, 12, 3, "0.01")).unwrap();
        assert_eq!(
            out.status,
            WindowStatus::Refuted {
                u: nat(3),
                z: rat("12")
            }
        );
    }

    #[test]
    fn piece_infimum_refutation_finds_rational_witness() {
        // at eps = 0.08 the violation region above z = 11 no longer
        // reaches z = 12, so the witness walks down to 11 + 1/2
        let out = verify_eps_window(&window(11, 12, 3, "0.08")).unwrap();
        assert_eq!(
            out.status,
            WindowStatus::Refuted {
                u: nat(3),
                z: rat("23/2")
            }
        );
    }

    #[test]
    fn desk_window_verifies() {
        let out = verify_eps_window(&window(3024, 20_000, 3, "1.97e-3")).unwrap();
        assert_eq!(out.status, WindowStatus::Verified);
    }

    #[test]
    fn desk_window_worst_pair_margin_is_pinned() {
        // tightest pair of the [3024, 2e4] window: u = 1423, z -> 3947+
        let table = arith::primes_up_to(4000).unwrap();
        let lhs = mertens_product(&table, &nat(1423), &nat(3948), &[2]).unwrap();
        let ope = Bound::exact(1.0) + Bound::from_rational(&rat("1.97e-3"));
        let rhs = ope * Bound::from_u64(3947).ln() / Bound::from_u64(1423).ln();
        let margin = rhs - lhs;
        assert!(margin.lo() > 3.2165e-6 && margin.hi() < 3.2167e-6);
    }

    #[test]
    fn verified_window_survives_exact_subsample() {
        let w = window(3024, 20_000, 3, "1.97e-3");
        assert_eq!(verify_eps_window(&w).unwrap().status, WindowStatus::Verified);

        let table = arith::primes_up_to(20_000).unwrap();
        let ps: Vec<u64> = table.range(3, 20_000).to_vec();
        let k0 = ps.partition_point(|&p| p < 3024);
        let ope = BigRational::one() + rat("1.97e-3");
        let mut rng = ChaCha8Rng::seed_from_u64(0x657073_77696e);
        for _ in 0..1000 {
            let j = rng.gen_range(k0..ps.len());
            let i = rng.gen_range(0..=j);
            let lhs = lhs_ratio(&ps, i, j + 1);
            assert_eq!(
                decide_infimum(&lhs, ps[i], ps[j], &ope),
                PairDecision::Safe,
                "pair u={} z={}+ fails exact recheck",
                ps[i],
                ps[j]
            );
        }
    }

    #[test]
    fn window_serde_round_trips() {
        let mut w = window(11, 12, 3, "0.08");
        w.status = WindowStatus::Refuted {
            u: nat(3),
            z: rat("23/2"),
        };
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains("\"refuted\""));
        assert!(text.contains("\"23/2\""));
        let back: EpsWindow = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);

        let v = window(3, 3, 3, "1.97e-3");
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.contains("\"197/100000\""));
        let back: EpsWindow = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    #[should_panic(expected = "u_min must be at least 3")]
    fn rejects_u_min_below_three() {
        let _ = verify_eps_window(&window(10, 20, 2, "0"));
    }

    #[test]
    fn oversized_window_is_a_resource_error() {
        let w = EpsWindow::new(
            nat(3),
            Natural::from(3_000_000_000u64),
            nat(3),
            BigRational::zero(),
            nat(2),
        );
        assert!(matches!(
            verify_eps_window(&w),
            Err(EstimateError::TableTooSmall { .. })
        ));
    }
}
