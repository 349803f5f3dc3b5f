//! Leading-grade evaluation.
//!
//! At order `t^sigma` every factor of a length-`sigma` contraction enters
//! through its linear part, covariant derivatives are partial derivatives,
//! and a wave of degree `p` contributes to a factor with `m` derivatives
//! only when `p = m + 2` (curvature) or `p = m` (scalar functions). Each
//! factor then expands into outer products of `k`, `e k`, `e` and `delta`,
//! and a product of such pieces contracts along paths and cycles of the
//! index graph.

use num::{BigInt, Integer, One, Zero};

use super::MetricJet;
use crate::expr::{Contraction, FactorKind, Link};
use crate::ratcoef::Rational;

#[derive(Clone, Copy, Debug)]
enum Piece {
    /// vector id, slot
    V(usize, usize),
    /// matrix id, slots
    M(usize, usize, usize),
    /// identity, slots
    I(usize, usize),
}

struct Tables {
    n: usize,
    vecs: Vec<Vec<i128>>,
    mats: Vec<Vec<i128>>,
}

struct MWave {
    k: usize,
    ek: usize,
    e: usize,
    kk: i128,
    kek: i128,
    tre: i128,
}

type Term = (Rational, Vec<Piece>);

fn r(v: i128) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn rq(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn derivs(m: usize, v: usize) -> Vec<Piece> {
    (0..m).map(|s| Piece::V(v, s)).collect()
}

fn with(mut a: Vec<Piece>, b: &[Piece]) -> Vec<Piece> {
    a.extend_from_slice(b);
    a
}

fn riemann(w: &MWave, m: usize) -> Vec<Term> {
    let d = derivs(m, w.k);
    let [a, b, c, e] = [m, m + 1, m + 2, m + 3];
    let k = |s| Piece::V(w.k, s);
    let h = rq(1, 2);
    vec![
        (h.clone(), with(d.clone(), &[k(b), k(c), Piece::M(w.e, a, e)])),
        (h.clone(), with(d.clone(), &[k(a), k(e), Piece::M(w.e, b, c)])),
        (-h.clone(), with(d.clone(), &[k(a), k(c), Piece::M(w.e, b, e)])),
        (-h, with(d, &[k(b), k(e), Piece::M(w.e, a, c)])),
    ]
}

/// Ricci on slots `b, e` after the derivative block.
fn ricci(w: &MWave, m: usize, b: usize, e: usize) -> Vec<Term> {
    let d = derivs(m, w.k);
    let h = rq(1, 2);
    vec![
        (h.clone(), with(d.clone(), &[Piece::V(w.k, b), Piece::V(w.ek, e)])),
        (h.clone(), with(d.clone(), &[Piece::V(w.ek, b), Piece::V(w.k, e)])),
        (-h.clone() * r(w.kk), with(d.clone(), &[Piece::M(w.e, b, e)])),
        (-h * r(w.tre), with(d, &[Piece::V(w.k, b), Piece::V(w.k, e)])),
    ]
}

fn scalar(w: &MWave) -> Rational {
    r(w.kek - w.kk * w.tre)
}

/// Schouten on slots `a, b`, times the extra pieces.
fn schouten(w: &MWave, m: usize, n: i64, a: usize, b: usize) -> Vec<Term> {
    let inv = rq(1, n - 2);
    let mut out: Vec<Term> = ricci(w, m, a, b).into_iter().map(|(c, p)| (c * &inv, p)).collect();
    let j = scalar(w) * rq(1, 2 * (n - 1)) * &inv;
    out.push((-j, with(derivs(m, w.k), &[Piece::I(a, b)])));
    out
}

fn weyl(w: &MWave, m: usize, n: i64) -> Vec<Term> {
    let [a, b, c, e] = [m, m + 1, m + 2, m + 3];
    let mut out = riemann(w, m);
    for (p, q, s, t, sign) in [(a, c, b, e, -1), (b, e, a, c, -1), (a, e, b, c, 1), (b, c, a, e, 1)] {
        for (k, pcs) in schouten(w, m, n, p, q) {
            out.push((k * r(sign), with(pcs, &[Piece::I(s, t)])));
        }
    }
    out
}

fn factor_terms(kind: FactorKind, m: usize, jet: &MetricJet, mw: &[(usize, MWave)], fwaves: &[(usize, i64, usize)]) -> Vec<Term> {
    let n = jet.n as i64;
    let mut out = vec![];
    match kind {
        FactorKind::ScalarFn(_) | FactorKind::AuxFn => {
            for &(p, c, v) in fwaves {
                if p == m {
                    out.push((r(c as i128), derivs(m, v)));
                }
            }
        }
        FactorKind::Metric => out.push((Rational::one(), vec![Piece::I(0, 1)])),
        _ => {
            for (p, w) in mw {
                if *p != m + 2 {
                    continue;
                }
                match kind {
                    FactorKind::Riemann => out.extend(riemann(w, m)),
                    FactorKind::Weyl => out.extend(weyl(w, m, n)),
                    FactorKind::Ricci => out.extend(ricci(w, m, m, m + 1)),
                    FactorKind::Schouten => out.extend(schouten(w, m, n, m, m + 1)),
                    FactorKind::ScalarCurv => out.push((scalar(w), derivs(m, w.k))),
                    _ => unreachable!(),
                }
            }
        }
    }
    out.retain(|(c, _)| !c.is_zero());
    out
}

struct Network<'a> {
    tab: &'a Tables,
    partner: Vec<usize>,
    base: Vec<usize>,
}

impl Network<'_> {
    fn value(&self, choice: &[&Vec<Piece>]) -> i128 {
        let n = self.tab.n;
        let total = self.partner.len();
        // global piece list and slot -> (piece, end)
        let mut pieces: Vec<(Piece, [usize; 2])> = vec![];
        let mut at = vec![(usize::MAX, 0u8); total];
        for (f, pcs) in choice.iter().enumerate() {
            let b = self.base[f];
            for &p in pcs.iter() {
                let id = pieces.len();
                let ends = match p {
                    Piece::V(_, s) => [b + s, usize::MAX],
                    Piece::M(_, s, t) | Piece::I(s, t) => [b + s, b + t],
                };
                at[ends[0]] = (id, 0);
                if ends[1] != usize::MAX {
                    at[ends[1]] = (id, 1);
                }
                pieces.push((p, ends));
            }
        }
        let mut seen = vec![false; pieces.len()];
        let mut result: i128 = 1;
        for start in 0..pieces.len() {
            let Piece::V(v0, _) = pieces[start].0 else { continue };
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut v = self.tab.vecs[v0].clone();
            let mut s = pieces[start].1[0];
            loop {
                let (q, end) = at[self.partner[s]];
                seen[q] = true;
                match pieces[q].0 {
                    Piece::V(u, _) => {
                        let u = &self.tab.vecs[u];
                        result *= v.iter().zip(u).map(|(a, b)| a * b).sum::<i128>();
                        break;
                    }
                    Piece::M(mi, _, _) => {
                        let mat = &self.tab.mats[mi];
                        v = (0..n).map(|i| (0..n).map(|j| mat[i * n + j] * v[j]).sum()).collect();
                    }
                    Piece::I(..) => {}
                }
                s = pieces[q].1[1 - end as usize];
            }
            if result == 0 {
                return 0;
            }
        }
        for start in 0..pieces.len() {
            if seen[start] {
                continue;
            }
            let mut mats: Vec<usize> = vec![];
            let mut q = start;
            let mut end = 0u8;
            loop {
                seen[q] = true;
                if let Piece::M(mi, _, _) = pieces[q].0 {
                    mats.push(mi);
                }
                let s = pieces[q].1[1 - end as usize];
                let (q2, e2) = at[self.partner[s]];
                if q2 == start {
                    break;
                }
                q = q2;
                end = e2;
            }
            result *= self.trace(&mats);
            if result == 0 {
                return 0;
            }
        }
        result
    }

    fn trace(&self, mats: &[usize]) -> i128 {
        let n = self.tab.n;
        if mats.is_empty() {
            return n as i128;
        }
        let mut acc = self.tab.mats[mats[0]].clone();
        for &m in &mats[1..] {
            let b = &self.tab.mats[m];
            let mut next = vec![0i128; n * n];
            for i in 0..n {
                for k in 0..n {
                    let a = acc[i * n + k];
                    if a == 0 {
                        continue;
                    }
                    for j in 0..n {
                        next[i * n + j] += a * b[k * n + j];
                    }
                }
            }
            acc = next;
        }
        (0..n).map(|i| acc[i * n + i]).sum()
    }
}

pub(super) fn evaluate(c: &Contraction, jet: &MetricJet) -> Rational {
    let n = jet.n;
    let mut tab = Tables {
        n,
        vecs: vec![],
        mats: vec![],
    };
    let mut mw = vec![];
    for w in &jet.waves {
        let k: Vec<i128> = w.k.iter().map(|&x| x as i128).collect();
        let e: Vec<i128> = w.e.iter().flatten().map(|&x| x as i128).collect();
        let ek: Vec<i128> = (0..n).map(|i| (0..n).map(|j| e[i * n + j] * k[j]).sum()).collect();
        let kk = k.iter().map(|x| x * x).sum();
        let kek = k.iter().zip(&ek).map(|(a, b)| a * b).sum();
        let tre = (0..n).map(|i| e[i * n + i]).sum();
        let id = tab.vecs.len();
        tab.vecs.push(k);
        tab.vecs.push(ek);
        tab.mats.push(e);
        mw.push((
            w.p,
            MWave {
                k: id,
                ek: id + 1,
                e: tab.mats.len() - 1,
                kk,
                kek,
                tre,
            },
        ));
    }
    let mut per_factor: Vec<Vec<(i128, Vec<Piece>)>> = vec![];
    let mut denom = BigInt::one();
    for f in c.factors() {
        let fw: Vec<(usize, i64, usize)> = jet
            .fn_waves(f.kind)
            .into_iter()
            .map(|w| {
                tab.vecs.push(w.k.iter().map(|&x| x as i128).collect());
                (w.p, w.c, tab.vecs.len() - 1)
            })
            .collect();
        let terms = factor_terms(f.kind, f.m, jet, &mw, &fw);
        if terms.is_empty() {
            return Rational::zero();
        }
        let l = terms.iter().fold(BigInt::one(), |acc, (c, _)| acc.lcm(c.denom()));
        let ints = terms
            .into_iter()
            .map(|(c, p)| {
                let v = (c * Rational::from_integer(l.clone())).to_integer();
                (i128::try_from(v).expect("factor coefficient fits i128"), p)
            })
            .collect();
        denom *= l;
        per_factor.push(ints);
    }
    let mut base = vec![];
    let mut total = 0;
    for f in c.factors() {
        base.push(total);
        total += f.slots();
    }
    let mut partner = vec![0; total];
    for (fi, ls) in c.links().iter().enumerate() {
        for (si, l) in ls.iter().enumerate() {
            if let Link::Slot(t) = l {
                partner[base[fi] + si] = base[t.factor] + t.slot;
            }
        }
    }
    let net = Network { tab: &tab, partner, base };
    let mut sum = BigInt::zero();
    let mut choice: Vec<&Vec<Piece>> = Vec::with_capacity(per_factor.len());
    fn rec<'a>(
        i: usize,
        coef: i128,
        per: &'a [Vec<(i128, Vec<Piece>)>],
        choice: &mut Vec<&'a Vec<Piece>>,
        net: &Network,
        sum: &mut BigInt,
    ) {
        if i == per.len() {
            let v = net.value(choice);
            if v != 0 {
                *sum += BigInt::from(coef) * BigInt::from(v);
            }
            return;
        }
        for (c, p) in &per[i] {
            choice.push(p);
            rec(i + 1, coef * c, per, choice, net, sum);
            choice.pop();
        }
    }
    rec(0, 1, &per_factor, &mut choice, &net, &mut sum);
    Rational::new(sum, denom)
}
