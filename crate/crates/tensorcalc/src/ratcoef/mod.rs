//! Exact coefficient arithmetic.
//!
//! [`Rational`] is an arbitrary-precision fraction, [`DimPoly`] a dense
//! polynomial in the dimension symbol `n`, and [`DimRatio`] a reduced
//! rational function of `n` with a monic denominator. Products whose length
//! depends on `n`, such as `(n-3)(n-4)...4`, are [`RangeProduct`] values and
//! only ever get evaluated at a concrete dimension.

mod parse;
mod poly;
mod range;
mod ratio;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

pub use parse::{parse_coef, CoefValue};
pub use poly::DimPoly;
pub use range::{Affine, ProdFactor, ProdRatio, RangeProduct};
pub use ratio::DimRatio;

/// Exact rational number; numerator and denominator are coprime and the
/// denominator is positive.
pub type Rational = BigRational;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CoefError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at n = {n}: factor {factor} vanishes")]
    Pole { n: i64, factor: String },
    #[error("malformed range: {0}")]
    MalformedRange(String),
    #[error("coefficient syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// Result of [`DimRatio::positive_for_all_n_geq`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    Positive,
    NotPositive,
    IdenticallyZero,
}

impl Positivity {
    pub fn holds(self) -> bool {
        self == Positivity::Positive
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `(-1)^e` for a possibly negative exponent.
pub fn sign_pow(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Product of `(n - c)` for `c` running from the constant of `start` to the
/// constant of `stop` in increments of `step`. Both bounds must be monic and
/// linear in `n`; a stop one step above the start gives the empty product.
pub fn falling_product(start: &DimPoly, stop: &DimPoly, step: i64) -> Result<DimPoly, CoefError> {
    if step <= 0 {
        return Err(CoefError::MalformedRange(format!("step {step} must be positive")));
    }
    let c0 = monic_linear_shift(start)?;
    let c1 = monic_linear_shift(stop)?;
    if c1 == c0 - step {
        return Ok(DimPoly::one());
    }
    if c1 < c0 {
        return Err(CoefError::MalformedRange(format!(
            "stop {} lies above start {}",
            stop, start
        )));
    }
    if (c1 - c0) % step != 0 {
        return Err(CoefError::MalformedRange(format!(
            "{} is not reachable from {} in steps of {step}",
            stop, start
        )));
    }
    let mut acc = DimPoly::one();
    let mut c = c0;
    while c <= c1 {
        acc = &acc * &DimPoly::n_minus(c);
        c += step;
    }
    Ok(acc)
}

/// For `p = n - c` returns `c`.
fn monic_linear_shift(p: &DimPoly) -> Result<i64, CoefError> {
    let bad = || CoefError::MalformedRange(format!("{p} is not of the form n - c"));
    if p.degree() != Some(1) || !p.coeff(1).is_one() {
        return Err(bad());
    }
    let c = -p.coeff(0);
    if !c.is_integer() {
        return Err(bad());
    }
    let c: i64 = c.to_integer().try_into().map_err(|_| bad())?;
    Ok(c)
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(r: &Rational) -> i64 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}
