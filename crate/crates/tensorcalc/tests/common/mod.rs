#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tensorcalc::expr::{Contraction, FactorKind, IFactor, IndexedTerm};

const KINDS: &[FactorKind] = &[
    FactorKind::Weyl,
    FactorKind::Riemann,
    FactorKind::Ricci,
    FactorKind::Schouten,
    FactorKind::ScalarCurv,
    FactorKind::ScalarFn(1),
    FactorKind::ScalarFn(2),
];

/// Random complete contraction with `1..=sigma_max` factors and at most
/// `dmax` derivatives per factor.
pub fn random_term(rng: &mut ChaCha8Rng, sigma_max: usize, dmax: usize) -> IndexedTerm {
    let sigma = rng.gen_range(1..=sigma_max);
    let mut shape: Vec<(FactorKind, usize)> = (0..sigma)
        .map(|_| (*KINDS.choose(rng).unwrap(), rng.gen_range(0..=dmax)))
        .collect();
    let total: usize = shape.iter().map(|(k, m)| k.intrinsic() + m).sum();
    if total % 2 == 1 {
        shape[0].1 += 1;
    }
    let total: usize = shape.iter().map(|(k, m)| k.intrinsic() + m).sum();
    let mut labels: Vec<u32> = (0..total as u32 / 2).flat_map(|l| [l, l]).collect();
    labels.shuffle(rng);
    let mut it = labels.into_iter();
    let factors = shape
        .into_iter()
        .map(|(k, m)| {
            let derivs: Vec<u32> = it.by_ref().take(m).collect();
            let intr: Vec<u32> = it.by_ref().take(k.intrinsic()).collect();
            IFactor::new(k, derivs, intr)
        })
        .collect();
    IndexedTerm::new(factors, vec![])
}

pub fn build(t: &IndexedTerm) -> Contraction {
    Contraction::from_indexed(t).unwrap().1
}

/// Apply one random symmetry of the labelled term; returns the sign it
/// introduces. Derivative indices commute in the canonical model.
pub fn random_move(rng: &mut ChaCha8Rng, t: &mut IndexedTerm) -> i8 {
    let fi = rng.gen_range(0..t.factors.len());
    match rng.gen_range(0..5) {
        0 => {
            let fj = rng.gen_range(0..t.factors.len());
            t.factors.swap(fi, fj);
            1
        }
        1 => {
            let f = &mut t.factors[fi];
            if f.derivs.len() >= 2 {
                let i = rng.gen_range(0..f.derivs.len());
                let j = rng.gen_range(0..f.derivs.len());
                f.derivs.swap(i, j);
            }
            1
        }
        2 => {
            let next = t.fresh();
            let labels: Vec<u32> = t.factors.iter().flat_map(|f| f.labels()).collect();
            if let Some(&l) = labels.choose(rng) {
                t.rename(l, next);
            }
            1
        }
        _ => {
            let f = &mut t.factors[fi];
            match (f.kind, f.intr.len()) {
                (FactorKind::Weyl | FactorKind::Riemann, 4) => match rng.gen_range(0..3) {
                    0 => {
                        f.intr.swap(0, 1);
                        -1
                    }
                    1 => {
                        f.intr.swap(2, 3);
                        -1
                    }
                    _ => {
                        f.intr.rotate_left(2);
                        1
                    }
                },
                (FactorKind::Ricci | FactorKind::Schouten, 2) => {
                    f.intr.swap(0, 1);
                    1
                }
                _ => 1,
            }
        }
    }
}
