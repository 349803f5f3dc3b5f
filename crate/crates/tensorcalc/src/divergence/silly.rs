//! Strip every derivative off `psi_h` by outermost integration by parts.

use super::{erase_slot, DivCertificate, DivError, DivStep};
use crate::expr::{canonicalize, Contraction, FactorKind, IFactor, IndexedTerm, LinComb, SlotId};
use crate::ratcoef::{int, DimRatio};
use crate::rewrite::weyl_double_divergence;

fn psi_at(c: &Contraction, h: u32) -> Result<usize, DivError> {
    let ps = c.positions(FactorKind::ScalarFn(h));
    match ps.as_slice() {
        [p] => Ok(*p),
        _ => Err(DivError::MissingPsi(h)),
    }
}

/// Exact certificate: the remainder has `psi_h` undifferentiated and equals
/// the input modulo the recorded divergences.
pub fn silly_certificate(lc: &LinComb, h: u32) -> Result<DivCertificate, DivError> {
    let mut cert = DivCertificate::new(lc.clone());
    let mut work: Vec<_> = lc.terms.clone();
    while let Some((k, t)) = work.pop() {
        if k.is_zero() {
            continue;
        }
        let p = psi_at(&t, h)?;
        if t.factors()[p].m == 0 {
            cert.remainder.push(k, t);
            continue;
        }
        let at = SlotId::new(p, 0);
        let (v, freed, others) = erase_slot(&t, at)?;
        cert.steps.push(DivStep {
            source: t,
            coef: k.clone(),
            erased: at,
            freed,
            vector_field: v,
        });
        for o in others {
            work.push((-&k, o));
        }
    }
    Ok(cert)
}

/// The remainder of [`silly_certificate`], collected.
pub fn silly_integrate_by_parts(lc: &LinComb, h: u32) -> Result<LinComb, DivError> {
    let cert = silly_certificate(lc, h)?;
    let mut out = LinComb::zero();
    for (k, c) in &cert.remainder.terms {
        let (s, cc) = canonicalize(c);
        out.push(k.scale(&crate::ratcoef::int(s as i64)), cc);
    }
    Ok(out.collect())
}

fn lap(next: &mut u32, x: usize) -> Vec<u32> {
    let mut out = vec![];
    for _ in 0..x {
        *next += 1;
        out.extend([*next, *next]);
    }
    out
}

fn sil_term(gamma1: usize, p: usize, q: usize, sigma: usize, sharp: bool) -> Contraction {
    assert!(sigma >= 3, "the family has at least three factors");
    let mut next = 0u32;
    let mut fresh = || {
        next += 1;
        next
    };
    let [i, l, i2, l2, j, k] = [fresh(), fresh(), fresh(), fresh(), fresh(), fresh()];
    let mut next = 100u32;
    let t: Vec<u32> = (0..gamma1 + 1).map(|x| 50 + x as u32).collect();
    let mut d1 = if sharp { t.clone() } else { vec![] };
    d1.extend(lap(&mut next, p));
    d1.extend([i, l]);
    let mut d2 = if sharp { t } else { vec![] };
    d2.extend(lap(&mut next, q));
    d2.extend([i2, l2]);
    let mut fs = vec![
        IFactor::new(FactorKind::Weyl, d1, vec![i, j, k, l]),
        IFactor::new(FactorKind::Weyl, d2, vec![i2, j, k, l2]),
        IFactor::new(FactorKind::ScalarFn(1), if sharp { vec![] } else { lap(&mut next, gamma1 + 1) }, vec![]),
    ];
    for h in 2..=sigma - 2 {
        fs.push(IFactor::new(FactorKind::ScalarFn(h as u32), lap(&mut next, 1), vec![]));
    }
    Contraction::from_indexed(&IndexedTerm::new(fs, vec![])).expect("well-formed").1
}

/// `Lap^p D^il W_ijkl (x) Lap^q D_i'l' W^i'jkl' (x) Lap^(gamma1+1) psi1 (x) Lap psi2 .. Lap psi_(sigma-2)`
pub fn sil_family(gamma1: usize, p: usize, q: usize, sigma: usize) -> Contraction {
    sil_term(gamma1, p, q, sigma, false)
}

/// The family member with `psi1` undifferentiated and `gamma1+1` derivatives
/// shared between the two Weyl factors.
pub fn sil_sharp(gamma1: usize, p: usize, q: usize, sigma: usize) -> Contraction {
    sil_term(gamma1, p, q, sigma, true)
}

fn coefficient_of(lc: &LinComb, c: &Contraction) -> DimRatio {
    let (s, cc) = canonicalize(c);
    let mut out = DimRatio::zero();
    for (k, t) in &lc.terms {
        let (st, ct) = canonicalize(t);
        if ct == cc {
            out = &out + &k.scale(&int((s * st) as i64));
        }
    }
    out
}

/// Coefficient of the sharp member after stripping the derivatives off
/// `psi1` in the family member.
pub fn silly_multiplicity(gamma1: usize, p: usize, q: usize, sigma: usize) -> Result<DimRatio, DivError> {
    let out = silly_integrate_by_parts(&LinComb::of(sil_family(gamma1, p, q, sigma)), 1)?;
    Ok(coefficient_of(&out, &sil_sharp(gamma1, p, q, sigma)))
}

/// Leading coefficient of the Riemann term after decomposing the doubly
/// contracted Weyl divergence in the sharp member, on one factor
/// (`both = false`) or on both.
pub fn silly_decomposed_coefficient(gamma1: usize, both: bool) -> Result<DimRatio, DivError> {
    let (p, q, sigma) = (0, 0, 3);
    let mult = silly_multiplicity(gamma1, p, q, sigma)?;
    let sharp = sil_sharp(gamma1, p, q, sigma);
    let r = weyl_double_divergence(&sharp, 0)?;
    let (k1, mut t) = r.main.terms[0].clone();
    let mut k = &mult * &k1;
    if both {
        let w = t.positions(FactorKind::Weyl)[0];
        let r2 = weyl_double_divergence(&t, w)?;
        let (k2, t2) = r2.main.terms[0].clone();
        k = &k * &k2;
        t = t2;
    }
    let mut lc = LinComb::zero();
    lc.push(k, t.clone());
    Ok(coefficient_of(&lc, &t))
}
