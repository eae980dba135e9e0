//! Exact rational arithmetic used throughout the certification paths.
//!
//! Reported quantities are arbitrary-precision [`Rational`]s.  The sweep hot
//! loops avoid allocation by carrying reduced `u64/u64` fractions ([`Frac`])
//! and comparing them by `u128` cross-multiplication; they are widened to
//! [`Rational`] only at report boundaries.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.  No floating point is involved in any
/// comparison against a certified threshold.
pub type Rational = num_rational::BigRational;

/// Build a rational from machine integers.
pub fn ratio(num: u64, den: u64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Canonical `"num/den"` rendering (always carries the denominator, even for
/// integers, so the format round-trips).
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse the `"num/den"` rendering produced by [`format_ratio`].  A bare
/// integer is accepted as `n/1`.
pub fn parse_ratio(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let den: BigInt = den
        .trim()
        .parse()
        .map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(num, den))
}

/// Lossy decimal rendering for humans; never used in a comparison.
pub fn decimal(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rounded-up integer part of a non-negative rational (`ceil`), if it fits.
pub fn ceil_u64(r: &Rational) -> Option<u64> {
    if r.is_negative() {
        return None;
    }
    r.ceil().numer().to_u64()
}

/// Reduced non-negative fraction on machine words.  Suitable for mismatch
/// masses out of sweeps: numerators stay below the pair weight `M < 2^40`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };

    pub fn new(num: u64, den: u64) -> Frac {
        assert!(den != 0, "zero denominator");
        let g = num_integer::gcd(num, den);
        Frac {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_rational(self) -> Rational {
        ratio(self.num, self.den)
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Frac) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Frac) -> std::cmp::Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl std::fmt::Display for Frac {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}
