//! Exact rational coefficients.
//!
//! Everything in the engine is computed over `Rat` (arbitrary-precision
//! reduced fractions); there is no floating point anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;
pub type Int = BigInt;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

pub fn ratq(num: i64, den: i64) -> Rat {
    Rat::new(Int::from(num), Int::from(den))
}

/// Floor of the integer square root, `None` for negative input.
pub fn int_sqrt(n: &Int) -> Option<Int> {
    if n.is_negative() {
        return None;
    }
    Some(n.sqrt())
}

/// Exact square root if `n` is a perfect square.
pub fn exact_sqrt(n: &Int) -> Option<Int> {
    let r = int_sqrt(n)?;
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// The rational as an integer, if its denominator is one.
pub fn as_int(r: &Rat) -> Option<Int> {
    if r.denom().is_one() {
        Some(r.numer().clone())
    } else {
        None
    }
}

pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}
