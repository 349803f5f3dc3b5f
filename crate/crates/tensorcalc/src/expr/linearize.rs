//! Linearization about the flat metric.
//!
//! Writing `g = delta + h`, a product of `sigma` curvature-type factors is,
//! up to terms of higher order in `h`, the product of the linearized
//! factors. Covariant derivatives become commuting partial derivatives and
//! every curvature tensor becomes a combination of `d d h`. Two linear
//! combinations of length-`sigma` contractions agree modulo longer
//! contractions exactly when their linearizations agree, which makes this
//! the decision procedure for leading-length identities.

use std::collections::BTreeMap;

use super::{canonicalize, Contraction, ExprError, FactorKind, IFactor, IndexedTerm, LinComb};
use crate::ratcoef::{int, rat, DimPoly, DimRatio};

pub type Sparse = BTreeMap<Contraction, DimRatio>;

fn h(derivs: Vec<u32>, a: u32, b: u32) -> IFactor {
    IFactor::new(FactorKind::Perturbation, derivs, vec![a, b])
}

fn with(d: &[u32], extra: &[u32]) -> Vec<u32> {
    let mut v = d.to_vec();
    v.extend_from_slice(extra);
    v
}

fn metric(a: u32, b: u32) -> IFactor {
    IFactor::new(FactorKind::Metric, vec![], vec![a, b])
}

type Expansion = Vec<(DimRatio, Vec<IFactor>)>;

fn half() -> DimRatio {
    DimRatio::from_rational(rat(1, 2))
}

/// `1/(n-2)`.
pub fn inv_n2() -> DimRatio {
    DimRatio::inv_n_minus(2)
}

/// `1/(2(n-1))`.
pub fn j_coef() -> DimRatio {
    DimRatio::new(DimPoly::one(), DimPoly::from_ints(&[-2, 2])).unwrap()
}

fn expand(f: &IFactor, fresh: &mut u32) -> Expansion {
    let d = &f.derivs;
    let mut next = || {
        let x = *fresh;
        *fresh += 1;
        x
    };
    match f.kind {
        FactorKind::Riemann => {
            let [a, b, c, e] = [f.intr[0], f.intr[1], f.intr[2], f.intr[3]];
            let k = half();
            vec![
                (k.clone(), vec![h(with(d, &[b, c]), a, e)]),
                (k.clone(), vec![h(with(d, &[a, e]), b, c)]),
                (-&k, vec![h(with(d, &[a, c]), b, e)]),
                (-&k, vec![h(with(d, &[b, e]), a, c)]),
            ]
        }
        FactorKind::Ricci => {
            let (b, e) = (f.intr[0], f.intr[1]);
            let x = next();
            let k = half();
            vec![
                (k.clone(), vec![h(with(d, &[b, x]), x, e)]),
                (k.clone(), vec![h(with(d, &[x, e]), b, x)]),
                (-&k, vec![h(with(d, &[x, x]), b, e)]),
                (-&k, vec![h(with(d, &[b, e]), x, x)]),
            ]
        }
        FactorKind::ScalarCurv => {
            let x = next();
            let y = next();
            vec![
                (DimRatio::one(), vec![h(with(d, &[x, y]), x, y)]),
                (DimRatio::from_int(-1), vec![h(with(d, &[x, x]), y, y)]),
            ]
        }
        FactorKind::Schouten => {
            let (a, b) = (f.intr[0], f.intr[1]);
            let mut out = vec![];
            let ric = IFactor::new(FactorKind::Ricci, d.clone(), vec![a, b]);
            for (k, fs) in expand(&ric, fresh) {
                out.push((&k * &inv_n2(), fs));
            }
            let r = IFactor::new(FactorKind::ScalarCurv, d.clone(), vec![]);
            let kr = -(&j_coef() * &inv_n2());
            for (k, mut fs) in expand(&r, fresh) {
                fs.push(metric(a, b));
                out.push((&k * &kr, fs));
            }
            out
        }
        FactorKind::Weyl => {
            let [a, b, c, e] = [f.intr[0], f.intr[1], f.intr[2], f.intr[3]];
            let rm = IFactor::new(FactorKind::Riemann, d.clone(), f.intr.clone());
            let mut out = expand(&rm, fresh);
            // W = Rm - (P_ac g_be + P_be g_ac - P_ae g_bc - P_bc g_ae)
            for (p, q, r, s, sign) in [(a, c, b, e, -1), (b, e, a, c, -1), (a, e, b, c, 1), (b, c, a, e, 1)] {
                let pf = IFactor::new(FactorKind::Schouten, d.clone(), vec![p, q]);
                for (k, mut fs) in expand(&pf, fresh) {
                    fs.push(metric(r, s));
                    out.push((k.scale(&int(sign)), fs));
                }
            }
            out
        }
        _ => vec![(DimRatio::one(), vec![f.clone()])],
    }
}

/// Linearization of one contraction as a sparse combination of canonical
/// contractions of `h`, `psi`, `Omega` and free metrics.
pub fn linearize_term(c: &Contraction) -> Sparse {
    let t = c.to_indexed();
    let mut fresh = t.fresh();
    let mut partial: Expansion = vec![(DimRatio::one(), vec![])];
    for f in &t.factors {
        let ex = expand(f, &mut fresh);
        let mut next = Vec::with_capacity(partial.len() * ex.len());
        for (k1, fs1) in &partial {
            for (k2, fs2) in &ex {
                let mut fs = fs1.clone();
                fs.extend(fs2.iter().cloned());
                next.push((k1 * k2, fs));
            }
        }
        partial = next;
    }
    let mut out = Sparse::new();
    for (k, fs) in partial {
        let it = IndexedTerm::new(fs, t.free.clone());
        let (traces, lc) = Contraction::from_indexed(&it).expect("linearization keeps labels valid");
        let (sign, canon) = canonicalize(&lc);
        if sign == 0 {
            continue;
        }
        let mut k = &k * &DimRatio::n().pow(traces);
        if sign < 0 {
            k = -k;
        }
        add_into(&mut out, canon, &k);
    }
    out.retain(|_, v| !v.is_zero());
    out
}

pub fn add_into(acc: &mut Sparse, key: Contraction, k: &DimRatio) {
    let e = acc.entry(key).or_insert_with(DimRatio::zero);
    *e = &*e + k;
}

/// Linearization of a whole combination.
pub fn linearize(lc: &LinComb) -> Sparse {
    let mut out = Sparse::new();
    for (k, c) in &lc.terms {
        for (key, v) in linearize_term(c) {
            add_into(&mut out, key, &(k * &v));
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// True when `lc` vanishes modulo contractions longer than its shortest
/// term.
pub fn vanishes_at_leading_length(lc: &LinComb) -> Result<bool, ExprError> {
    let Some(s) = lc.min_sigma() else { return Ok(true) };
    Ok(linearize(&lc.at_length(s)).is_empty())
}

/// [`vanishes_at_leading_length`] at a fixed dimension.
pub fn vanishes_at_leading_length_at(lc: &LinComb, n: i64) -> Result<bool, ExprError> {
    let Some(s) = lc.min_sigma() else { return Ok(true) };
    for v in linearize(&lc.at_length(s)).values() {
        if v.eval_at(n).map_err(|e| ExprError::Invalid(e.to_string()))? != crate::ratcoef::int(0) {
            return Ok(false);
        }
    }
    Ok(true)
}
