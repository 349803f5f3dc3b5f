//! Formal ambient-metric calculus at the base point `t = 1, rho = 0`.
//!
//! Only the component facts needed for the expansion of
//! `Lap^(n/2-2) |R~|^2` are encoded. Terms with extra curvature factors
//! (`Q(R)`, `Cubic(R)`) are recorded as markers and never enter
//! leading-length results.

mod display;

use num::{BigInt, One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::divergence::{classify_quadratic, DivError};
use crate::expr::{Contraction, ExprError, FactorKind, IFactor, IndexedTerm, LinComb};
use crate::ratcoef::{CoefError, DimPoly, DimRatio, Rational};

pub use display::{
    displayed_block, displayed_blocks, displayed_constant, incomplete_row, leftover, leftover_closed_form, y_row_braces, y_row_table,
    DisplayBlock, YRow,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AmbientError {
    #[error("dimension {0} must be even and at least 6")]
    Dimension(i64),
    #[error("alpha {alpha} outside 0..={max} for {pattern:?}")]
    AlphaOutOfRange { pattern: CurvPattern, alpha: usize, max: i64 },
    #[error("factor 2w+n-2k vanishes at step {step} (w={w}, k={k})")]
    VanishingFactor { step: usize, w: i64, k: i64 },
    #[error("term not reducible to the canonical quadratic: {0}")]
    Unreduced(String),
    #[error(transparent)]
    Div(#[from] DivError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Coef(#[from] CoefError),
}

/// Coordinate direction of an ambient index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum IndexClass {
    Zero,
    Base,
    Infinity,
}

/// `R~_ijkl`, `R~_inf jkl`, `R~_inf jk inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CurvPattern {
    BaseBBBB,
    InfBBB,
    InfBBInf,
}

impl CurvPattern {
    pub fn infinities(self) -> usize {
        match self {
            CurvPattern::BaseBBBB => 0,
            CurvPattern::InfBBB => 1,
            CurvPattern::InfBBInf => 2,
        }
    }

    /// Largest alpha for which the component formula holds.
    pub fn max_alpha(self, n: i64) -> i64 {
        n / 2 - 2 - self.infinities() as i64
    }
}

/// `(n-3)(n-4)(n-6)...(n-2j)`: the leading `n-3` followed by the even
/// descending tail down to `n-2j` (empty for `j < 2`).
pub fn tail_product(j: usize) -> DimPoly {
    let mut p = DimPoly::n_minus(3);
    for i in 2..=j {
        p = &p * &DimPoly::n_minus(2 * i as i64);
    }
    p
}

/// Signed coefficient of the `alpha`-th `d_inf` derivative of a curvature
/// component, as a rational function of `n`.
pub fn obstruction_coefficient(pattern: CurvPattern, alpha: usize) -> DimRatio {
    if pattern == CurvPattern::BaseBBBB && alpha == 0 {
        return DimRatio::one();
    }
    let (sign_exp, j) = match pattern {
        CurvPattern::BaseBBBB => (alpha as i64 - 1, alpha),
        CurvPattern::InfBBB => (alpha as i64 - 1, alpha + 1),
        CurvPattern::InfBBInf => (alpha as i64, alpha + 2),
    };
    let sign = DimPoly::from_ints(&[crate::ratcoef::sign_pow(sign_exp)]);
    DimRatio::new(sign, tail_product(j)).expect("nonzero product")
}

/// A `d_inf` derivative of a curvature component: free indices in slot order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientComponent {
    pub alpha: usize,
    pub pattern: CurvPattern,
    pub value: LinComb,
    pub q_remainder: bool,
}

fn lap_labels(next: &mut u32, x: usize) -> Vec<u32> {
    let mut out = vec![];
    for _ in 0..x {
        out.extend([*next, *next]);
        *next += 1;
    }
    out
}

fn term(factors: Vec<IFactor>, free: Vec<u32>) -> Contraction {
    Contraction::from_indexed(&IndexedTerm::new(factors, free)).expect("well-formed").1
}

fn check_dim(n: i64) -> Result<(), AmbientError> {
    if n < 6 || n % 2 != 0 {
        return Err(AmbientError::Dimension(n));
    }
    Ok(())
}

pub fn d_infinity_curvature(pattern: CurvPattern, alpha: usize, n: i64) -> Result<AmbientComponent, AmbientError> {
    check_dim(n)?;
    let max = pattern.max_alpha(n);
    if alpha as i64 > max {
        return Err(AmbientError::AlphaOutOfRange { pattern, alpha, max });
    }
    let k = obstruction_coefficient(pattern, alpha);
    let w = FactorKind::Weyl;
    let mut value = LinComb::zero();
    match pattern {
        CurvPattern::BaseBBBB if alpha == 0 => {
            value.push(k, term(vec![IFactor::new(w, vec![], vec![0, 1, 2, 3])], vec![0, 1, 2, 3]));
        }
        CurvPattern::BaseBBBB => {
            // Lap^(alpha-1) [D^t D_j W_tikl - D^t D_i W_tjkl]
            let (i, j, kk, l) = (0, 1, 2, 3);
            for (a, b, s) in [(j, i, 1), (i, j, -1)] {
                let mut next = 5;
                let mut d = lap_labels(&mut next, alpha - 1);
                d.extend([4, a]);
                value.push(
                    k.scale(&Rational::from_integer(s.into())),
                    term(vec![IFactor::new(w, d, vec![4, b, kk, l])], vec![0, 1, 2, 3]),
                );
            }
        }
        CurvPattern::InfBBB => {
            // Lap^alpha D^s W_sjkl, free j,k,l
            let mut next = 4;
            let mut d = lap_labels(&mut next, alpha);
            d.push(3);
            value.push(k, term(vec![IFactor::new(w, d, vec![3, 0, 1, 2])], vec![0, 1, 2]));
        }
        CurvPattern::InfBBInf => {
            // Lap^alpha D^il W_ijkl, free j,k
            let mut next = 4;
            let mut d = lap_labels(&mut next, alpha);
            d.extend([2, 3]);
            value.push(k, term(vec![IFactor::new(w, d, vec![2, 0, 1, 3])], vec![0, 1]));
        }
    }
    Ok(AmbientComponent {
        alpha,
        pattern,
        value,
        q_remainder: alpha > 0,
    })
}

/// A `d_inf` derivative of an ambient metric component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricDerivative {
    pub value: LinComb,
    pub q_remainder: bool,
}

/// `count`-th `d_inf` derivative of `g~^{ab}` (`raised`) or `g~_{ab}`.
/// Patterns without a listed formula are zero.
pub fn d_infinity_metric(a: IndexClass, b: IndexClass, count: usize, raised: bool) -> MetricDerivative {
    use IndexClass::*;
    let mut value = LinComb::zero();
    let schouten = |derivs: Vec<u32>, intr: Vec<u32>| term(vec![IFactor::new(FactorKind::Schouten, derivs, intr)], vec![0, 1]);
    let mut q = false;
    match (a, b, count, raised) {
        (Infinity, Infinity, 1, true) => value.push(DimRatio::from_int(-2), Contraction::unit()),
        (Base, Base, 1, true) => value.push(DimRatio::from_int(-2), schouten(vec![], vec![0, 1])),
        (Base, Base, 1, false) => value.push(DimRatio::from_int(2), schouten(vec![], vec![0, 1])),
        (Base, Base, s, false) if s >= 2 => {
            // 2/((4-n)(6-n)...(2s-n)) [Lap^(s-1) P_ij - Lap^(s-2) D_ij P^a_a]
            let mut den = DimPoly::one();
            for j in 2..=s {
                den = &den * &DimPoly::affine(-1, 2 * j as i64);
            }
            let k = DimRatio::new(DimPoly::from_ints(&[2]), den).expect("nonzero product");
            let mut next = 2;
            value.push(k.clone(), schouten(lap_labels(&mut next, s - 1), vec![0, 1]));
            let mut next = 3;
            let mut d = lap_labels(&mut next, s - 2);
            d.extend([0, 1]);
            value.push(-&k, schouten(d, vec![2, 2]));
            q = true;
        }
        _ => {}
    }
    MetricDerivative { value, q_remainder: q }
}

/// `d_inf^0 Lap^k F = const * d_inf^k F + Lap_g L + Q(R)` for an ambient
/// invariant of weight `w`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LaplacianExpansion {
    pub factors: Vec<i64>,
    #[serde(serialize_with = "ser_rat")]
    pub leading: Rational,
    pub has_l_term: bool,
}

pub fn expand_laplacian_power(w: i64, k: usize, n: i64) -> Result<LaplacianExpansion, AmbientError> {
    let mut factors = vec![];
    for j in 0..k {
        // the Laplacian applied j-th from the left acts on weight w - 2(k-1-j)
        let wj = w - 2 * (k as i64 - 1 - j as i64);
        let f = 2 * wj + n - 2 * j as i64;
        if f == 0 {
            return Err(AmbientError::VanishingFactor { step: j, w: wj, k: j as i64 });
        }
        factors.push(f);
    }
    let leading = factors.iter().fold(Rational::one(), |acc, &f| acc * Rational::from_integer(f.into()));
    Ok(LaplacianExpansion {
        factors,
        leading,
        has_l_term: k > 0,
    })
}

/// Which display block a Leibniz term belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Block {
    /// One curvature factor undifferentiated.
    Leading,
    /// Both curvature factors differentiated, no metric hit.
    FirstSum,
    /// One `g~^{inf inf}` hit.
    SecondSum,
    /// Two `g~^{inf inf}` hits.
    ThirdSum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeibnizTerm {
    pub block: Block,
    pub alpha: (usize, usize),
    /// Ordered derivative distributions times equivalent index positions.
    pub multiplicity: BigInt,
    /// `(-2)^(metric hits)`.
    pub metric_factor: i64,
    /// The contracted product of the two components, with all constants.
    pub value: LinComb,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeibnizExpansion {
    pub n: i64,
    pub terms: Vec<LeibnizTerm>,
    /// Terms with a third curvature factor were dropped.
    pub cubic: bool,
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |a, i| a * BigInt::from(i))
}

/// Number of equivalent positions for `s` infinity pairs: each infinity
/// sits in one slot of a distinct antisymmetric pair, and the two
/// components carry it in the same place, so signs cancel.
pub fn infinity_positions(s: usize) -> usize {
    match s {
        0 => 1,
        1 => 4,
        2 => 4,
        _ => 0,
    }
}

/// Leibniz count: `N! / (alpha1! alpha2!)`, with each of the `s` hit
/// metrics taking one derivative, times the index positions.
pub fn leibniz_multiplicity(total: usize, s: usize, a1: usize, a2: usize) -> BigInt {
    assert_eq!(a1 + a2 + s, total);
    factorial(total) / (factorial(a1) * factorial(a2)) * BigInt::from(infinity_positions(s))
}

/// Contract free index `k` of every term of `a` with free index `k` of `b`.
pub fn contract_free(a: &LinComb, b: &LinComb) -> LinComb {
    let mut out = LinComb::zero();
    for (ka, ta) in &a.terms {
        for (kb, tb) in &b.terms {
            let ia = ta.to_indexed();
            let mut ib = tb.to_indexed();
            let nfree = ia.free.len() as u32;
            assert_eq!(nfree as usize, ib.free.len(), "free index counts differ");
            let off = ia.fresh() + ib.fresh();
            for f in &mut ib.factors {
                for l in f.derivs.iter_mut().chain(f.intr.iter_mut()) {
                    if *l >= nfree {
                        *l += off;
                    }
                }
            }
            let mut factors = ia.factors.clone();
            factors.extend(ib.factors);
            let t = IndexedTerm::new(factors, vec![]);
            out.push_indexed(ka * kb, &t).expect("well-formed product");
        }
    }
    out
}

/// Leibniz expansion of `d_inf^(n/2-2) |R~|^2` at leading length.
pub fn leibniz_expand_norm_squared(n: i64) -> Result<LeibnizExpansion, AmbientError> {
    check_dim(n)?;
    let total = (n / 2 - 2) as usize;
    let mut terms = vec![];
    let patterns = [CurvPattern::BaseBBBB, CurvPattern::InfBBB, CurvPattern::InfBBInf];
    for (s, &pat) in patterns.iter().enumerate() {
        if s > total {
            break;
        }
        let rest = total - s;
        for a1 in 0..=rest {
            let a2 = rest - a1;
            if a1 as i64 > pat.max_alpha(n) || a2 as i64 > pat.max_alpha(n) {
                continue;
            }
            let c1 = d_infinity_curvature(pat, a1, n)?;
            let c2 = d_infinity_curvature(pat, a2, n)?;
            let multiplicity = leibniz_multiplicity(total, s, a1, a2);
            let metric_factor = (-2i64).pow(s as u32);
            let k = DimRatio::from_rational(Rational::from_integer(&multiplicity * BigInt::from(metric_factor)));
            let value = contract_free(&c1.value, &c2.value).scaled(&k).at_n(n)?;
            let block = match s {
                0 if a1 == 0 || a2 == 0 => Block::Leading,
                0 => Block::FirstSum,
                1 => Block::SecondSum,
                _ => Block::ThirdSum,
            };
            terms.push(LeibnizTerm {
                block,
                alpha: (a1, a2),
                multiplicity,
                metric_factor,
                value,
            });
        }
    }
    Ok(LeibnizExpansion { n, terms, cubic: true })
}

/// Contribution of each Leibniz term after reduction to the canonical
/// quadratic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedTerm {
    pub block: Block,
    pub alpha: (usize, usize),
    #[serde(serialize_with = "ser_rat")]
    pub coefficient: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub n: i64,
    pub terms: Vec<ReducedTerm>,
    #[serde(serialize_with = "ser_rat")]
    pub net: Rational,
}

/// Reduce every Leibniz term with the quadratic family multiples and sum.
pub fn reduce_to_canonical_quadratic(n: i64) -> Result<Reduction, AmbientError> {
    let exp = leibniz_expand_norm_squared(n)?;
    let mut terms = vec![];
    let mut net = Rational::zero();
    for t in &exp.terms {
        let mut c = Rational::zero();
        for (k, ct) in &t.value.collect().terms {
            let (shape, sign) = classify_quadratic(ct, n)
                .map_err(|e| AmbientError::Unreduced(format!("{} ({e})", crate::textio::print_contraction(ct))))?;
            let kv = k.eval_at(n)?;
            c += kv * shape.expected_multiple(n) * Rational::from_integer(sign.into());
        }
        net += &c;
        terms.push(ReducedTerm {
            block: t.block,
            alpha: t.alpha,
            coefficient: c,
        });
    }
    Ok(Reduction { n, terms, net })
}

/// Full chain for the ambient invariant `Lap^(n/2-2) |R~|^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmbientReport {
    pub n: i64,
    pub laplacian: LaplacianExpansion,
    pub reduction: Reduction,
    #[serde(serialize_with = "ser_rat")]
    pub net_constant: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub displayed_constant: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub leftover: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub leftover_closed_form: Rational,
    pub y_rows: Vec<YRow>,
    /// Multiple of `|D^(n/2-2) W|^2` equivalent to the canonical quadratic.
    #[serde(serialize_with = "ser_rat")]
    pub quadratic_to_norm: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub constant: Rational,
    pub sign: i8,
    pub nonzero: bool,
}

/// `(n-3)/(2(n-2))`.
pub fn quadratic_to_norm(n: i64) -> Rational {
    Rational::new((n - 3).into(), (2 * (n - 2)).into())
}

pub fn verify_motlagh(n: i64) -> Result<AmbientReport, AmbientError> {
    check_dim(n)?;
    let laplacian = expand_laplacian_power(-4, (n / 2 - 2) as usize, n)?;
    let reduction = reduce_to_canonical_quadratic(n)?;
    let net = reduction.net.clone();
    let constant = &laplacian.leading * &net * quadratic_to_norm(n);
    let sign = if constant.is_zero() {
        0
    } else if constant > Rational::zero() {
        1
    } else {
        -1
    };
    Ok(AmbientReport {
        n,
        laplacian,
        displayed_constant: displayed_constant(n)?,
        leftover: leftover(n)?,
        leftover_closed_form: leftover_closed_form(n)?,
        y_rows: y_row_table(n)?,
        quadratic_to_norm: quadratic_to_norm(n),
        net_constant: net,
        reduction,
        nonzero: sign != 0,
        constant,
        sign,
    })
}

pub(crate) fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub(crate) fn ser_opt_rat<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests;
