//! Outward-rounded evaluation of the analytic toolbox: linear-sieve shape
//! functions, Rosser-style product bounds, Mertens-window verification, and
//! the explicit prime-sum inequalities consumed by the theorem certifier.
//!
//! Every return value is a [`Bound`] containing the exact real value; a
//! caller that compares the correct endpoint against a constant gets a
//! machine-checked inequality.

pub mod mertens;

pub use mertens::{parse_ratio, verify_eps_window, EpsWindow, WindowStatus};

use crate::arith::{Natural, PrimeTable};
use crate::bound::Bound;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("{func} is only defined for {domain}, got {got}")]
    Domain {
        func: &'static str,
        domain: &'static str,
        got: f64,
    },
    #[error("prime table up to {have} too small, need {need}")]
    TableTooSmall { have: u64, need: u64 },
}

macro_rules! constant {
    ($name:ident, $lit:literal, $doc:literal) => {
        #[doc = $doc]
        pub fn $name() -> Bound {
            static CELL: OnceLock<Bound> = OnceLock::new();
            *CELL.get_or_init(|| Bound::from_decimal_str($lit))
        }
    };
}

// 40-digit decimal expansions, each enclosed to one ulp. The independent
// series cross-check lives in this module's tests.
constant!(exp_gamma, "1.78107241799019798523650410310717954917", "e^γ");
constant!(
    exp_neg_gamma,
    "0.5614594835668851698241432147908807867657",
    "e^(−γ)"
);
constant!(e_squared, "7.38905609893065022723042746057500781318", "e²");
constant!(
    e_neg_squared,
    "0.1353352832366126918939994949724844034076",
    "e^(−2)"
);
constant!(
    ln_10,
    "2.302585092994045684017991454684364207601",
    "ln 10, for exact powers of ten in gate checks"
);
constant!(
    six_over_pi_squared,
    "0.6079271018540266286632767792583658334262",
    "6/π², the squarefree density"
);

/// Upper linear-sieve function F(s) = 2e^γ/s on its closed-form range
/// 0 < s ≤ 3.
pub fn upper_big_f(s: f64) -> Result<Bound, EstimateError> {
    if !(s > 0.0 && s <= 3.0) {
        return Err(EstimateError::Domain {
            func: "upper_big_f",
            domain: "0 < s <= 3",
            got: s,
        });
    }
    Ok(Bound::exact(2.0) * exp_gamma() / Bound::exact(s))
}

/// Lower linear-sieve function f(s) = 2e^γ·ln(s−1)/s on 2 ≤ s ≤ 4.
pub fn lower_f(s: f64) -> Result<Bound, EstimateError> {
    if !(2.0..=4.0).contains(&s) {
        return Err(EstimateError::Domain {
            func: "lower_f",
            domain: "2 <= s <= 4",
            got: s,
        });
    }
    let ln_sm1 = Bound::exact(s - 1.0).ln();
    Ok(Bound::exact(2.0) * exp_gamma() * ln_sm1 / Bound::exact(s))
}

/// The sieve remainder shape h(s), piecewise on [0, ∞):
/// s⁻¹e⁻² on [0,1], e⁻² on [1,2], e^(−s) on (2,3], 3s⁻¹e^(−s) beyond;
/// continuous at the knots, h(0) = +∞.
pub fn h(s: f64) -> Result<Bound, EstimateError> {
    if !(s >= 0.0) {
        return Err(EstimateError::Domain {
            func: "h",
            domain: "s >= 0",
            got: s,
        });
    }
    let v = if s == 0.0 {
        Bound::new(f64::INFINITY, f64::INFINITY)
    } else if s < 1.0 {
        e_neg_squared() / Bound::exact(s)
    } else if s <= 2.0 {
        e_neg_squared()
    } else if s <= 3.0 {
        Bound::exact(-s).exp()
    } else {
        Bound::exact(3.0) * Bound::exact(-s).exp() / Bound::exact(s)
    };
    Ok(v)
}

/// Rosser-style two-sided bounds for V(z) = ∏_{p<z}(1 − 1/p):
/// always ≤ (e^(−γ)/ln z)(1 + 1/(2 ln²z)); for z ≥ 285 also
/// ≥ (e^(−γ)/ln z)(1 − 1/(2 ln²z)).
pub fn rosser_v_bounds(z: &Natural) -> (Bound, Option<Bound>) {
    assert!(*z >= Natural::from(2u32), "rosser bounds need z >= 2");
    let ln_z = Bound::from_biguint(z).ln();
    let base = exp_neg_gamma() / ln_z;
    let half_inv_sq = Bound::exact(0.5) / (ln_z * ln_z);
    let one = Bound::exact(1.0);
    let upper = base * (one + half_inv_sq);
    let lower = if *z >= Natural::from(285u32) {
        Some(base * (one - half_inv_sq))
    } else {
        None
    };
    (upper, lower)
}

/// ∏ (1 − 1/p)⁻¹ over primes u ≤ p < z not in `exclude`, outward-rounded.
pub fn mertens_product(
    table: &PrimeTable,
    u: &Natural,
    z: &Natural,
    exclude: &[u64],
) -> Result<Bound, EstimateError> {
    assert!(
        *u >= Natural::from(2u32) && u <= z,
        "mertens_product needs 2 <= u <= z"
    );
    let need: u64 = u64::try_from(z).unwrap_or(u64::MAX);
    if need > table.limit().saturating_add(1) {
        return Err(EstimateError::TableTooSmall {
            have: table.limit(),
            need,
        });
    }
    let u64_lo = u64::try_from(u).expect("u fits if z does");
    let mut acc = Bound::exact(1.0);
    for &p in table.range(u64_lo, need) {
        if exclude.contains(&p) {
            continue;
        }
        acc = acc * Bound::from_u64(p) / Bound::from_u64(p - 1);
    }
    Ok(acc)
}

/// Tail bound Σ_{p≥a} 1/p² ≤ 2.22/(a·ln a), valid for a > 1.
pub fn tail_recip_square_bound(a: f64) -> Result<Bound, EstimateError> {
    if !(a > 1.0) {
        return Err(EstimateError::Domain {
            func: "tail_recip_square_bound",
            domain: "a > 1",
            got: a,
        });
    }
    let ba = Bound::exact(a);
    Ok(Bound::from_decimal_str("2.22") / (ba * ba.ln()))
}

/// Prime-counting upper bound π(x) < (x/ln x)(1 + 3/(2 ln x)) for x > 1.
pub fn pi_upper(x: f64) -> Result<Bound, EstimateError> {
    if !(x > 1.0) {
        return Err(EstimateError::Domain {
            func: "pi_upper",
            domain: "x > 1",
            got: x,
        });
    }
    let bx = Bound::exact(x);
    let ln_x = bx.ln();
    Ok(bx / ln_x * (Bound::exact(1.0) + Bound::exact(1.5) / ln_x))
}

/// Squarefree-count upper bound Σ_{d≤x} μ²(d) ≤ (6/π²)x + 0.5√x for x ≥ 10.
pub fn squarefree_count_upper(x: f64) -> Result<Bound, EstimateError> {
    if !(x >= 10.0) {
        return Err(EstimateError::Domain {
            func: "squarefree_count_upper",
            domain: "x >= 10",
            got: x,
        });
    }
    let bx = Bound::exact(x);
    Ok(six_over_pi_squared() * bx + Bound::exact(0.5) * bx.sqrt())
}

/// Interval prime-reciprocal bound
/// Σ_{a≤p<b} 1/p < lnln b − lnln a + 5/(ln a)³, valid for b > a > 1000.
pub fn recip_prime_interval_upper(a: &Natural, b: &Natural) -> Result<Bound, EstimateError> {
    if !(*a > Natural::from(1000u32) && b > a) {
        return Err(EstimateError::Domain {
            func: "recip_prime_interval_upper",
            domain: "b > a > 1000",
            got: f64::NAN,
        });
    }
    let ln_a = Bound::from_biguint(a).ln();
    let ln_b = Bound::from_biguint(b).ln();
    Ok(ln_b.ln() - ln_a.ln() + Bound::exact(5.0) / ln_a.powi(3))
}
