//! Canonical labelling of contractions.
//!
//! Factors are placed one at a time. Every candidate (factor, orientation)
//! gets a descriptor of its slots relative to what is already placed, and
//! only candidates with the least descriptor survive to the next level.
//! Derivative slots form a symmetric block, so their descriptors are
//! sorted. All surviving placements share one encoding; if two of them carry
//! opposite orientation signs the contraction equals its own negative.

use std::cmp::Ordering;

use super::{Contraction, Factor, FactorKind, IFactor, IndexedTerm, Link, SlotId};
use crate::ratcoef::{DimPoly, DimRatio};

type Perm = (&'static [usize], i8);

const FOUR: [Perm; 8] = [
    (&[0, 1, 2, 3], 1),
    (&[1, 0, 2, 3], -1),
    (&[0, 1, 3, 2], -1),
    (&[1, 0, 3, 2], 1),
    (&[2, 3, 0, 1], 1),
    (&[3, 2, 0, 1], -1),
    (&[2, 3, 1, 0], -1),
    (&[3, 2, 1, 0], 1),
];
const TWO: [Perm; 2] = [(&[0, 1], 1), (&[1, 0], 1)];
const NONE: [Perm; 1] = [(&[], 1)];

fn group(kind: FactorKind) -> &'static [Perm] {
    match kind.intrinsic() {
        4 => &FOUR,
        2 => &TWO,
        _ => &NONE,
    }
}

type Desc = [u32; 4];

#[derive(Clone)]
struct State {
    rank: Vec<Option<u32>>,
    orient: Vec<usize>,
    order: Vec<usize>,
    sign: i8,
}

fn inv_pos(kind: FactorKind, o: usize, intr: usize) -> usize {
    let p = group(kind)[o].0;
    p.iter().position(|&x| x == intr).unwrap()
}

struct Ctx<'a> {
    c: &'a Contraction,
}

impl Ctx<'_> {
    fn header(&self, f: usize) -> Desc {
        let fac = self.c.factors[f];
        let (k, l) = fac.kind.code();
        [k, l, fac.m as u32, 0]
    }

    fn slot_desc(&self, st: &State, f: usize, o: usize, link: Link) -> Desc {
        match link {
            Link::Free(k) => [0, k as u32, 0, 0],
            Link::Slot(t) => {
                let other = self.c.factors[t.factor];
                let rank = st.rank[t.factor];
                if t.factor != f && rank.is_none() {
                    let (k, l) = other.kind.code();
                    let class = u32::from(!other.is_deriv(t.slot));
                    return [3, k, (l << 8) | other.m as u32, class];
                }
                let orient = if t.factor == f { o } else { st.orient[t.factor] };
                let p = if other.is_deriv(t.slot) {
                    0
                } else {
                    1 + inv_pos(other.kind, orient, t.slot - other.m) as u32
                };
                match rank {
                    Some(r) if t.factor != f => [1, r, p, 0],
                    _ => [2, p, 0, 0],
                }
            }
        }
    }

    fn descriptor(&self, st: &State, f: usize, o: usize) -> Vec<Desc> {
        let fac = self.c.factors[f];
        let links = &self.c.links[f];
        let mut out = vec![self.header(f)];
        let perm = group(fac.kind)[o].0;
        for &p in perm {
            out.push(self.slot_desc(st, f, o, links[fac.m + p]));
        }
        let mut ds: Vec<Desc> = (0..fac.m).map(|s| self.slot_desc(st, f, o, links[s])).collect();
        ds.sort_unstable();
        out.extend(ds);
        out
    }
}

/// Canonical form and the sign relating it to the input; sign 0 means the
/// contraction vanishes by symmetry.
pub fn canonicalize(c: &Contraction) -> (i8, Contraction) {
    if weyl_traced(c) {
        return (0, c.clone());
    }
    let nf = c.factors.len();
    let ctx = Ctx { c };
    let mut states = vec![State {
        rank: vec![None; nf],
        orient: vec![0; nf],
        order: vec![],
        sign: 1,
    }];
    for r in 0..nf {
        let mut best: Option<Vec<Desc>> = None;
        let mut next: Vec<State> = vec![];
        for st in &states {
            for f in 0..nf {
                if st.rank[f].is_some() {
                    continue;
                }
                for (o, &(_, s)) in group(c.factors[f].kind).iter().enumerate() {
                    let mut cand = st.clone();
                    cand.orient[f] = o;
                    let d = ctx.descriptor(&cand, f, o);
                    let ord = match &best {
                        None => Ordering::Less,
                        Some(b) => d.cmp(b),
                    };
                    if ord == Ordering::Greater {
                        continue;
                    }
                    if ord == Ordering::Less {
                        best = Some(d);
                        next.clear();
                    }
                    cand.rank[f] = Some(r as u32);
                    cand.order.push(f);
                    cand.sign *= s;
                    next.push(cand);
                }
            }
        }
        states = next;
    }
    let sign = states[0].sign;
    if states.iter().any(|s| s.sign != sign) {
        return (0, c.clone());
    }
    (sign, build(c, &states[0]))
}

fn weyl_traced(c: &Contraction) -> bool {
    c.internal_edges().iter().any(|(a, b)| {
        let f = c.factors[a.factor];
        f.kind == FactorKind::Weyl && !f.is_deriv(a.slot) && !f.is_deriv(b.slot)
    })
}

/// Materialise the placement: factors in rank order with oriented intrinsic
/// slots, derivative slots sorted by partner.
fn build(c: &Contraction, st: &State) -> Contraction {
    let nf = c.factors.len();
    let factors: Vec<Factor> = st.order.iter().map(|&f| c.factors[f]).collect();
    // new intrinsic position of an old slot
    let new_intr = |f: usize, s: usize| -> usize {
        let fac = c.factors[f];
        fac.m + inv_pos(fac.kind, st.orient[f], s - fac.m)
    };
    #[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
    enum Key {
        Free(usize),
        Intr(u32, usize),
        Deriv(u32),
    }
    let rank = |f: usize| st.rank[f].unwrap();
    // sorted derivative slots per new factor
    let mut dslots: Vec<Vec<(Key, usize)>> = vec![vec![]; nf];
    for (nr, &f) in st.order.iter().enumerate() {
        let fac = c.factors[f];
        for s in 0..fac.m {
            let key = match c.links[f][s] {
                Link::Free(k) => Key::Free(k),
                Link::Slot(t) => {
                    let o = c.factors[t.factor];
                    if o.is_deriv(t.slot) {
                        Key::Deriv(rank(t.factor))
                    } else {
                        Key::Intr(rank(t.factor), new_intr(t.factor, t.slot))
                    }
                }
            };
            dslots[nr].push((key, s));
        }
        dslots[nr].sort();
    }
    let mut new_slot = vec![vec![0usize; 0]; nf];
    for (nr, &f) in st.order.iter().enumerate() {
        let fac = c.factors[f];
        let mut v = vec![0; fac.slots()];
        for (pos, &(_, s)) in dslots[nr].iter().enumerate() {
            v[s] = pos;
        }
        for s in fac.m..fac.slots() {
            v[s] = new_intr(f, s);
        }
        new_slot[f] = v;
    }
    let mut links: Vec<Vec<Link>> = factors.iter().map(|f| vec![Link::Free(0); f.slots()]).collect();
    for (nr, &f) in st.order.iter().enumerate() {
        let fac = c.factors[f];
        for s in fac.m..fac.slots() {
            let l = match c.links[f][s] {
                Link::Free(k) => Link::Free(k),
                Link::Slot(t) => {
                    let o = c.factors[t.factor];
                    if o.is_deriv(t.slot) {
                        continue;
                    }
                    Link::Slot(SlotId::new(rank(t.factor) as usize, new_slot[t.factor][t.slot]))
                }
            };
            links[nr][new_slot[f][s]] = l;
        }
    }
    // derivative slots: free, intrinsic partners, then deriv-deriv pairs
    // matched in sorted order
    for (nr, ds) in dslots.iter().enumerate() {
        for (pos, &(key, _)) in ds.iter().enumerate() {
            match key {
                Key::Free(k) => links[nr][pos] = Link::Free(k),
                Key::Intr(r2, p2) => {
                    links[nr][pos] = Link::Slot(SlotId::new(r2 as usize, p2));
                    links[r2 as usize][p2] = Link::Slot(SlotId::new(nr, pos));
                }
                Key::Deriv(_) => {}
            }
        }
    }
    for nr in 0..nf {
        for r2 in nr..nf {
            let mine: Vec<usize> = dslots[nr]
                .iter()
                .enumerate()
                .filter(|(_, (k, _))| *k == Key::Deriv(r2 as u32))
                .map(|(p, _)| p)
                .collect();
            if r2 == nr {
                for pair in mine.chunks(2) {
                    links[nr][pair[0]] = Link::Slot(SlotId::new(nr, pair[1]));
                    links[nr][pair[1]] = Link::Slot(SlotId::new(nr, pair[0]));
                }
            } else {
                let theirs: Vec<usize> = dslots[r2]
                    .iter()
                    .enumerate()
                    .filter(|(_, (k, _))| *k == Key::Deriv(nr as u32))
                    .map(|(p, _)| p)
                    .collect();
                for (&a, &b) in mine.iter().zip(&theirs) {
                    links[nr][a] = Link::Slot(SlotId::new(r2, b));
                    links[r2][b] = Link::Slot(SlotId::new(nr, a));
                }
            }
        }
    }
    Contraction::from_parts_unchecked(factors, links)
}

/// Replace intrinsic traces by their named contractions: Riemann traces by
/// Ricci, Ricci traces by scalar curvature, Schouten traces by
/// `R/(2(n-1))`, Weyl traces by zero.
pub fn resolve_traces(c: &Contraction) -> (DimRatio, Contraction) {
    let mut t = c.to_indexed();
    let mut coef = DimRatio::one();
    'outer: loop {
        for i in 0..t.factors.len() {
            let f = &t.factors[i];
            let intr = f.intr.clone();
            let pair = (0..intr.len())
                .flat_map(|a| (a + 1..intr.len()).map(move |b| (a, b)))
                .find(|&(a, b)| intr[a] == intr[b]);
            let Some((a, b)) = pair else { continue };
            let derivs = f.derivs.clone();
            let repl = match f.kind {
                FactorKind::Weyl => return (DimRatio::zero(), c.clone()),
                FactorKind::Riemann => {
                    let (sign, rest) = match (a, b) {
                        (0, 1) | (2, 3) => return (DimRatio::zero(), c.clone()),
                        (0, 2) => (1, [1, 3]),
                        (1, 3) => (1, [0, 2]),
                        (0, 3) => (-1, [1, 2]),
                        (1, 2) => (-1, [0, 3]),
                        _ => unreachable!(),
                    };
                    coef = coef.scale(&crate::ratcoef::int(sign));
                    IFactor::new(FactorKind::Ricci, derivs, vec![intr[rest[0]], intr[rest[1]]])
                }
                FactorKind::Ricci => IFactor::new(FactorKind::ScalarCurv, derivs, vec![]),
                FactorKind::Schouten => {
                    let j = DimRatio::new(DimPoly::one(), DimPoly::from_ints(&[-2, 2])).unwrap();
                    coef = &coef * &j;
                    IFactor::new(FactorKind::ScalarCurv, derivs, vec![])
                }
                _ => continue,
            };
            t.factors[i] = repl;
            continue 'outer;
        }
        break;
    }
    let (traces, out) = Contraction::from_indexed(&IndexedTerm::new(t.factors, t.free)).expect("trace resolution keeps validity");
    (&coef * &DimRatio::n().pow(traces), out)
}
