//! Outward-rounded interval arithmetic.
//!
//! A [`Bound`] is a pair of f64 endpoints lo ≤ hi guaranteed to enclose the
//! real value it stands for. Every operation rounds the lower endpoint down
//! and the upper endpoint up, so enclosure is preserved through arbitrary
//! chains; an inequality checked on the appropriate endpoints is then a
//! proof, not an estimate.
//!
//! Mechanism: +, −, ×, ÷ and sqrt are correctly rounded by IEEE 754, so one
//! ulp of widening after each makes the result directional. ln and exp go
//! through the platform libm, which is faithful but not correctly rounded;
//! those take [`TRANSCENDENTAL_SLOP`] ulps on each side. Endpoints may be
//! ±∞ (extended reals): infinities absorb rounding steps.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Ulps of extra widening applied to ln/exp results.
const TRANSCENDENTAL_SLOP: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    lo: f64,
    hi: f64,
}

pub(crate) fn step_down(x: f64, ulps: u32) -> f64 {
    let mut v = x;
    for _ in 0..ulps {
        v = v.next_down();
    }
    v
}

pub(crate) fn step_up(x: f64, ulps: u32) -> f64 {
    let mut v = x;
    for _ in 0..ulps {
        v = v.next_up();
    }
    v
}

/// Exact rational value of a finite f64.
fn rat_of(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Round-to-nearest-ish f64 approximation of a rational, safe at any
/// magnitude (no ∞/∞ overflow); the outward adjustment loop afterwards
/// repairs whatever rounding this picks.
fn approx_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    let e = n.bits() as i64 - d.bits() as i64;
    // m = floor(n / d · 2^(64−e)) has 63..65 bits, so m.to_f64 is accurate
    // and the final scaling by 2^(e−64) is exact up to overflow clamps.
    let m = if 64 - e >= 0 {
        (n << (64 - e) as u64) / d
    } else {
        n / (d << (e - 64) as u64)
    };
    let scale = e - 64;
    let mag = if scale > 1_030 {
        f64::INFINITY
    } else if scale < -1_150 {
        0.0
    } else if scale < -900 {
        // split the scaling so the intermediate power of two stays normal
        m.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-900) * 2f64.powi((scale + 900) as i32)
    } else {
        m.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(scale as i32)
    };
    if neg {
        -mag
    } else {
        mag
    }
}

impl Bound {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan(), "NaN endpoint");
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Bound { lo, hi }
    }

    /// Point interval; the f64 itself is the exact value.
    pub fn exact(v: f64) -> Self {
        Bound::new(v, v)
    }

    pub fn from_u64(v: u64) -> Self {
        if v <= (1 << 53) {
            Bound::exact(v as f64)
        } else {
            let f = v as f64;
            Bound::new(step_down(f, 1), step_up(f, 1))
        }
    }

    /// Tight two-sided enclosure of an exact rational.
    pub fn from_rational(r: &BigRational) -> Self {
        let c = approx_rational(r);
        let mut lo = if c.is_finite() { c } else { f64::MAX.copysign(c) };
        while let Some(q) = rat_of(lo) {
            if q <= *r {
                break;
            }
            lo = lo.next_down();
        }
        let mut hi = if c.is_finite() { c } else { f64::MAX.copysign(c) };
        while let Some(q) = rat_of(hi) {
            if q >= *r {
                break;
            }
            hi = hi.next_up();
        }
        Bound::new(lo, hi)
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        Bound::from_rational(&BigRational::from_integer(BigInt::from(n.clone())))
    }

    /// Enclosure of a decimal literal such as "1.7810724179901979852365041031"
    /// or "2.8e-4". The string is converted to an exact rational first, so
    /// the result is within one ulp regardless of the literal's length.
    pub fn from_decimal_str(s: &str) -> Self {
        let r = parse_decimal_rational(s)
            .unwrap_or_else(|| panic!("invalid decimal literal {s:?}"));
        Bound::from_rational(&r)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Width relative to magnitude; used to police constant tightness.
    pub fn rel_width(&self) -> f64 {
        let m = self.lo.abs().max(self.hi.abs());
        if m == 0.0 {
            0.0
        } else {
            self.width() / m
        }
    }

    pub fn contains_f64(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        let lo_ok = match rat_of(self.lo) {
            Some(q) => q <= *r,
            None => self.lo == f64::NEG_INFINITY,
        };
        let hi_ok = match rat_of(self.hi) {
            Some(q) => q >= *r,
            None => self.hi == f64::INFINITY,
        };
        lo_ok && hi_ok
    }

    fn outward(lo: f64, hi: f64, ulps: u32) -> Bound {
        Bound::new(step_down(lo, ulps), step_up(hi, ulps))
    }

    pub fn min_with(&self, other: &Bound) -> Bound {
        Bound::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    pub fn max_with(&self, other: &Bound) -> Bound {
        Bound::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    /// √x for x ≥ 0 (lower endpoint clamped at 0 if it dips negative
    /// through rounding).
    pub fn sqrt(&self) -> Bound {
        assert!(self.hi >= 0.0, "sqrt of negative interval");
        let lo = if self.lo <= 0.0 {
            0.0
        } else {
            step_down(self.lo.sqrt(), 1).max(0.0)
        };
        Bound::new(lo, step_up(self.hi.sqrt(), 1))
    }

    /// Natural log; requires lo ≥ 0, with ln 0 = −∞.
    pub fn ln(&self) -> Bound {
        assert!(self.lo >= 0.0, "ln of negative interval");
        let lo = if self.lo == 0.0 {
            f64::NEG_INFINITY
        } else {
            step_down(self.lo.ln(), TRANSCENDENTAL_SLOP)
        };
        let hi = step_up(self.hi.ln(), TRANSCENDENTAL_SLOP);
        Bound::new(lo, hi)
    }

    pub fn exp(&self) -> Bound {
        let lo = if self.lo == f64::NEG_INFINITY {
            0.0
        } else {
            step_down(self.lo.exp(), TRANSCENDENTAL_SLOP).max(0.0)
        };
        let hi = if self.hi == f64::INFINITY {
            f64::INFINITY
        } else {
            step_up(self.hi.exp(), TRANSCENDENTAL_SLOP)
        };
        Bound::new(lo, hi)
    }

    /// Integer power by repeated interval multiplication (sound for any
    /// sign; not the tightest form for even powers of sign-crossing
    /// intervals, which never arise here).
    pub fn powi(&self, n: u32) -> Bound {
        let mut acc = Bound::exact(1.0);
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// Real power x^e = exp(e·ln x); requires a positive base.
    pub fn pow(&self, e: &Bound) -> Bound {
        assert!(self.lo > 0.0, "pow needs positive base");
        (*e * self.ln()).exp()
    }

    pub fn recip(&self) -> Bound {
        Bound::exact(1.0) / *self
    }
}

impl Add for Bound {
    type Output = Bound;
    fn add(self, rhs: Bound) -> Bound {
        Bound::outward(self.lo + rhs.lo, self.hi + rhs.hi, 1)
    }
}

impl Sub for Bound {
    type Output = Bound;
    fn sub(self, rhs: Bound) -> Bound {
        Bound::outward(self.lo - rhs.hi, self.hi - rhs.lo, 1)
    }
}

impl Neg for Bound {
    type Output = Bound;
    fn neg(self) -> Bound {
        Bound::new(-self.hi, -self.lo)
    }
}

/// 0·∞ corners take the Hickey convention (0); they only occur against an
/// endpoint that is exactly zero, where the product of interior points is
/// dominated by the other corners anyway.
fn corner(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p.is_nan() {
        0.0
    } else {
        p
    }
}

impl Mul for Bound {
    type Output = Bound;
    fn mul(self, rhs: Bound) -> Bound {
        let c = [
            corner(self.lo, rhs.lo),
            corner(self.lo, rhs.hi),
            corner(self.hi, rhs.lo),
            corner(self.hi, rhs.hi),
        ];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Bound::outward(lo, hi, 1)
    }
}

impl Div for Bound {
    type Output = Bound;
    fn div(self, rhs: Bound) -> Bound {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            // divisor straddles or touches zero: only the whole line is sound
            return Bound::new(f64::NEG_INFINITY, f64::INFINITY);
        }
        let c = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        if c.iter().any(|v| v.is_nan()) {
            return Bound::new(f64::NEG_INFINITY, f64::INFINITY);
        }
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Bound::outward(lo, hi, 1)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

/// Exact rational value of a decimal literal with optional sign, fraction,
/// and exponent ("42", "-1.5", "2.8e-4", "1e40"). Returns None on malformed
/// input. Shared by constant initialization, config parsing, and the CLI's
/// scientific-notation number arguments.
pub fn parse_decimal_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp10) = match rest.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits: String = [int_part, frac_part].concat();
    let n = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    let n = if neg { -n } else { n };
    let shift = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let r = if shift >= 0 {
        BigRational::from_integer(n * ten.pow(shift as u32))
    } else {
        BigRational::new(n, ten.pow((-shift) as u32))
    };
    Some(r)
}

/// Exact natural-number value of a decimal literal; rejects fractions and
/// negatives. Accepts scientific notation with nonnegative net exponent,
/// e.g. "1e40" or "2.5e3".
pub fn parse_decimal_natural(s: &str) -> Option<BigUint> {
    let r = parse_decimal_rational(s)?;
    if !r.is_integer() || r.is_negative() {
        return None;
    }
    r.to_integer().to_biguint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        parse_decimal_rational(s).unwrap()
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(rat("42"), BigRational::from_integer(42.into()));
        assert_eq!(rat("-1.5"), BigRational::new((-3).into(), 2.into()));
        assert_eq!(rat("2.8e-4"), BigRational::new(28.into(), 100_000.into()));
        assert_eq!(rat("1e3"), BigRational::from_integer(1000.into()));
        assert_eq!(rat("2.5e3"), BigRational::from_integer(2500.into()));
        assert!(parse_decimal_rational("").is_none());
        assert!(parse_decimal_rational("1.2.3").is_none());
        assert!(parse_decimal_rational("abc").is_none());

        assert_eq!(parse_decimal_natural("1e40").unwrap().to_string(), format!("1{}", "0".repeat(40)));
        assert!(parse_decimal_natural("2.5").is_none());
        assert!(parse_decimal_natural("-3").is_none());
    }

    #[test]
    fn rational_enclosure_is_tight_and_correct() {
        for s in ["1", "0.1", "-0.1", "2.8e-4", "1e40", "-97.25", "3.1415926535897932384626433832795028841971"] {
            let r = rat(s);
            let b = Bound::from_rational(&r);
            assert!(b.contains_rational(&r), "{s}");
            assert!(b.rel_width() <= 1e-15, "{s}: {}", b.rel_width());
        }
        // dyadics are exact
        let b = Bound::from_rational(&rat("0.25"));
        assert_eq!(b.lo(), 0.25);
        assert_eq!(b.hi(), 0.25);
    }

    #[test]
    fn biguint_enclosure() {
        let n = BigUint::parse_bytes(b"1649000000000000000000000000000000000000", 10).unwrap();
        let b = Bound::from_biguint(&n);
        assert!(b.contains_rational(&BigRational::from_integer(BigInt::from(n))));
        assert!(b.rel_width() <= 1e-15);
        let small = BigUint::from(12345u32);
        let b = Bound::from_biguint(&small);
        assert_eq!(b.lo(), 12345.0);
        assert_eq!(b.hi(), 12345.0);
    }

    #[test]
    fn arithmetic_encloses_exact_rational_arithmetic() {
        let a = rat("1.1");
        let b = rat("7.3");
        let ba = Bound::from_rational(&a);
        let bb = Bound::from_rational(&b);
        assert!((ba + bb).contains_rational(&(&a + &b)));
        assert!((ba - bb).contains_rational(&(&a - &b)));
        assert!((ba * bb).contains_rational(&(&a * &b)));
        assert!((ba / bb).contains_rational(&(&a / &b)));
        assert!((-ba).contains_rational(&(-&a)));
        assert!(ba.powi(7).contains_rational(&num_traits::pow(a.clone(), 7)));
    }

    #[test]
    fn signed_multiplication_corners() {
        let m = Bound::new(-2.0, 3.0) * Bound::new(-5.0, 7.0);
        assert!(m.lo() <= -15.0 && m.hi() >= 21.0);
        let d = Bound::new(1.0, 2.0) / Bound::new(-1.0, 1.0);
        assert_eq!(d.lo(), f64::NEG_INFINITY);
        assert_eq!(d.hi(), f64::INFINITY);
    }

    #[test]
    fn transcendentals_enclose_reference_values() {
        // 40-digit reference values, enclosed after outward evaluation.
        let cases = [
            (2.0f64, "0.6931471805599453094172321214581765680755"),
            (10.0, "2.302585092994045684017991454684364207601"),
            (1e8, "18.42068074395236547214393163747491366081"),
            (0.5, "-0.6931471805599453094172321214581765680755"),
        ];
        for (x, lnx) in cases {
            assert!(Bound::exact(x).ln().contains_rational(&rat(lnx)), "ln {x}");
        }
        let e2 = Bound::exact(2.0).exp();
        assert!(e2.contains_rational(&rat("7.389056098930650227230427460575007813180")));
        let em2 = Bound::exact(-2.0).exp();
        assert!(em2.contains_rational(&rat("0.1353352832366126918939994949724844034076")));
        assert!(Bound::exact(2.0).sqrt().contains_rational(&rat("1.414213562373095048801688724209698078570")));
    }

    #[test]
    fn exp_ln_round_trip_contains_argument() {
        let mut x = 0.001f64;
        while x < 1e6 {
            let b = Bound::exact(x).ln().exp();
            assert!(b.contains_f64(x), "x={x}");
            x *= 1.7;
        }
    }

    #[test]
    fn extended_endpoints() {
        let h0 = Bound::new(f64::INFINITY, f64::INFINITY);
        assert!(!h0.is_finite());
        let z = Bound::exact(0.0);
        assert_eq!(z.ln().lo(), f64::NEG_INFINITY);
        assert_eq!(Bound::new(f64::NEG_INFINITY, 0.0).exp().lo(), 0.0);
        // 0·∞ corner resolves without NaN
        let p = z * h0;
        assert!(!p.lo().is_nan() && !p.hi().is_nan());
    }

    #[test]
    fn pow_general() {
        // 10^0.82 = 6.60693448...
        let b = Bound::exact(10.0).pow(&Bound::exact(0.82));
        assert!(b.contains_rational(&rat("6.606934480075960065096462836350482659096")));
        assert!(b.rel_width() < 1e-12);
    }
}
