//! Closed-form block coefficients of the bracketed constant, each already
//! multiplied by the reduction multiple of its quadratic shape.

use num::Zero;
use serde::Serialize;

use super::{check_dim, ser_opt_rat, ser_rat, tail_product, AmbientError, Block};
use crate::ratcoef::{binomial, int, DimPoly, DimRatio, Rational};

fn k(n: i64, j: usize) -> Rational {
    tail_product(j).eval_int(n)
}

fn bin(a: usize, b: usize) -> Rational {
    Rational::from_integer(binomial(a as u64, b as u64))
}

/// Block coefficient at `x`, or `None` when `x` is outside the block's range.
pub fn displayed_block(block: Block, x: usize, n: i64) -> Result<Option<Rational>, AmbientError> {
    check_dim(n)?;
    let big_n = (n / 2 - 2) as usize;
    let v = match block {
        Block::Leading if x == 0 => int(4) / k(n, big_n),
        Block::FirstSum if x >= 1 && x < big_n => int(2) * bin(big_n, x) / (k(n, x) * k(n, big_n - x)),
        Block::SecondSum if x < big_n => {
            int(-8 * big_n as i64) * bin(big_n - 1, x) / (k(n, x + 1) * k(n, big_n - x))
        }
        Block::ThirdSum if big_n >= 2 && x <= big_n - 2 => {
            int(8 * (big_n * (big_n - 1)) as i64) * bin(big_n - 2, x) / (k(n, x + 2) * k(n, big_n - x))
        }
        _ => return Ok(None),
    };
    Ok(Some(v))
}

/// One block with its coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisplayBlock {
    pub block: Block,
    pub x: usize,
    #[serde(serialize_with = "ser_rat")]
    pub value: Rational,
}

pub fn displayed_blocks(n: i64) -> Result<Vec<DisplayBlock>, AmbientError> {
    let big_n = (n / 2 - 2) as usize;
    let mut out = vec![];
    for block in [Block::Leading, Block::FirstSum, Block::SecondSum, Block::ThirdSum] {
        for x in 0..=big_n {
            if let Some(value) = displayed_block(block, x, n)? {
                out.push(DisplayBlock { block, x, value });
            }
        }
    }
    Ok(out)
}

pub fn displayed_constant(n: i64) -> Result<Rational, AmbientError> {
    Ok(displayed_blocks(n)?.into_iter().map(|b| b.value).sum())
}

/// `first(y+2) + second(y+1) + third(y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct YRow {
    pub y: usize,
    #[serde(serialize_with = "ser_opt_rat")]
    pub first: Option<Rational>,
    #[serde(serialize_with = "ser_rat")]
    pub second: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub third: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub sum: Rational,
}

pub fn y_row_table(n: i64) -> Result<Vec<YRow>, AmbientError> {
    check_dim(n)?;
    let big_n = (n / 2 - 2) as usize;
    let mut out = vec![];
    for y in 0..big_n.saturating_sub(1) {
        let first = displayed_block(Block::FirstSum, y + 2, n)?;
        let second = displayed_block(Block::SecondSum, y + 1, n)?.unwrap_or_else(Rational::zero);
        let third = displayed_block(Block::ThirdSum, y, n)?.unwrap_or_else(Rational::zero);
        let sum = first.clone().unwrap_or_else(Rational::zero) + &second + &third;
        out.push(YRow { y, first, second, third, sum });
    }
    Ok(out)
}

/// The row combination with the common factor removed, as a rational
/// function of `y` (printed in the variable `n`).
pub fn y_row_braces() -> DimRatio {
    let y = |a: i64, b: i64| DimRatio::from_poly(DimPoly::affine(a, b));
    let r = |num: DimRatio, den: DimRatio| num.checked_div(&den).expect("nonzero");
    let a = r(&y(2, 6) * &y(2, 4), &y(1, 2) * &y(1, 1));
    let b = r(&DimRatio::from_int(4) * &y(2, 4), y(1, 1));
    &(&a - &b) + &DimRatio::from_int(4)
}

/// `lead + first(1) + second(0)`.
pub fn leftover(n: i64) -> Result<Rational, AmbientError> {
    let mut s = Rational::zero();
    for (b, x) in [(Block::Leading, 0), (Block::FirstSum, 1), (Block::SecondSum, 0)] {
        s += displayed_block(b, x, n)?.unwrap_or_else(Rational::zero);
    }
    Ok(s)
}

/// `4 / ((n-3)(n-4)(n-6)...4)`.
pub fn leftover_closed_form(n: i64) -> Result<Rational, AmbientError> {
    check_dim(n)?;
    Ok(int(4) / k(n, (n / 2 - 2) as usize))
}

/// The last row, which has no first-sum partner.
pub fn incomplete_row(n: i64) -> Result<Option<YRow>, AmbientError> {
    Ok(y_row_table(n)?.into_iter().last().filter(|r| r.first.is_none()))
}
