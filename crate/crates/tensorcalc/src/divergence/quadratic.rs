//! Quadratic Weyl contractions modulo divergences, by search over
//! integration-by-parts moves and a leading-length linear solve.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{erase_slot, DivCertificate, DivError, DivStep, LinCache};
use crate::expr::linalg::{Echelon, KeyIndex, Row};
use crate::expr::linearize::Sparse;
use crate::expr::{canonicalize, Contraction, FactorKind, IFactor, IndexedTerm, LinComb, SlotId};
use crate::ratcoef::{sign_pow, DimRatio, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOpts {
    /// Maximum number of distinct canonical contractions visited.
    pub max_pool: usize,
}

impl Default for SearchOpts {
    fn default() -> Self {
        SearchOpts { max_pool: 20_000 }
    }
}

/// Expansion of `input` as `sum x_i targets_i + sum y_k div V_k` modulo
/// longer contractions, at dimension `n`. Returns `x` and a leading-only
/// certificate whose remainder is `sum x_i targets_i`.
pub fn find_divergence(
    input: &LinComb,
    targets: &[Contraction],
    n: i64,
    opts: SearchOpts,
) -> Result<(Vec<Rational>, DivCertificate), DivError> {
    let input_n = input.at_n(n)?.collect();
    let mut pool: HashSet<Contraction> = HashSet::new();
    let mut queue: VecDeque<Contraction> = VecDeque::new();
    for c in input_n.terms.iter().map(|(_, c)| c).chain(targets.iter()) {
        let c = canonicalize(c).1;
        if pool.insert(c.clone()) {
            queue.push_back(c);
        }
    }
    // (V, origin, erased slot, freed slot, collected divergence)
    let mut fields: Vec<(Contraction, Contraction, SlotId, SlotId, LinComb)> = vec![];
    let mut seen_v: HashSet<Contraction> = HashSet::new();
    while let Some(t) = queue.pop_front() {
        for (fi, f) in t.factors().iter().enumerate() {
            for s in 0..f.m {
                let at = SlotId::new(fi, s);
                let (v, freed, _) = erase_slot(&t, at)?;
                let (_, cv) = canonicalize(&v);
                if !seen_v.insert(cv.clone()) {
                    continue;
                }
                let d = cv.free_index_divergence()?.collect();
                for (_, c) in &d.terms {
                    if pool.len() < opts.max_pool && pool.insert(c.clone()) {
                        queue.push_back(c.clone());
                    }
                }
                fields.push((cv, t.clone(), at, freed, d));
            }
        }
    }

    let mut cache = LinCache::new(n);
    let mut keys = KeyIndex::default();
    let mut ech = Echelon::new();
    let lin_lc = |lc: &LinComb, cache: &mut LinCache| -> Result<Sparse, DivError> {
        let mut acc = Sparse::new();
        for (k, c) in &lc.terms {
            let k = DimRatio::from_rational(k.eval_at(n)?);
            for (key, v) in cache.get(c)? {
                crate::expr::linearize::add_into(&mut acc, key.clone(), &(&k * v));
            }
        }
        Ok(acc)
    };
    for (i, f) in fields.iter().enumerate() {
        let s = lin_lc(&f.4, &mut cache)?;
        ech.insert(i, keys.row(&s));
    }
    let k0 = fields.len();
    for (i, t) in targets.iter().enumerate() {
        let s = lin_lc(&LinComb::of(t.clone()), &mut cache)?;
        ech.insert(k0 + i, keys.row(&s));
    }
    let s = lin_lc(&input_n, &mut cache)?;
    let row = keys.row(&s);
    let combo: Row = if row.is_empty() {
        Row::new()
    } else {
        ech.insert(k0 + targets.len(), row).ok_or(DivError::NotFound(pool.len()))?
    };

    let mut x = vec![Rational::from_integer(0.into()); targets.len()];
    let mut cert = DivCertificate::new(input_n.clone());
    cert.leading_only = true;
    cert.dim = Some(n);
    for (id, k) in combo {
        let kv = k.as_constant().expect("constant coefficients at fixed n");
        if id >= k0 {
            x[id - k0] = kv.clone();
            cert.remainder.push(k, targets[id - k0].clone());
        } else {
            let (v, src, erased, freed, _) = &fields[id];
            cert.steps.push(DivStep {
                source: src.clone(),
                coef: k,
                erased: *erased,
                freed: *freed,
                vector_field: v.clone(),
            });
        }
    }
    Ok((x, cert))
}

/// The five families of quadratic Weyl contractions reducible to the
/// canonical quadratic. `x` is the Laplacian power on the first factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadShape {
    /// `W_ijkl Lap^(n/2-3) D^i D_t W^tjkl`
    WeylLaplacianDivergence,
    /// `Lap^x D^st W_sjtl (x) Lap^(n/2-4-x) D_s't' W^s'jt'l`
    DoubleDivergencePair { x: usize },
    /// `Lap^x D^s W_sjkl (x) Lap^(n/2-3-x) D_t W^tjkl`
    DivergencePair { x: usize },
    /// `Lap^x D^as W_sjkl (x) Lap^(n/2-4-x) D_at W^tjkl`
    GradDivergencePair { x: usize },
    /// `Lap^x D^ba W_abcd (x) Lap^(n/2-4-x) D^{b alpha} W_{alpha beta}^cd`
    CrossedDivergence { x: usize },
}

impl QuadShape {
    pub fn all(n: i64) -> Vec<QuadShape> {
        let h = (n / 2) as usize;
        let mut out = vec![QuadShape::WeylLaplacianDivergence];
        if h >= 4 {
            out.extend((0..=h - 4).map(|x| QuadShape::DoubleDivergencePair { x }));
        }
        out.extend((0..=h - 3).map(|x| QuadShape::DivergencePair { x }));
        if h >= 4 {
            out.extend((0..=h - 4).map(|x| QuadShape::GradDivergencePair { x }));
            out.extend((0..=h - 4).map(|x| QuadShape::CrossedDivergence { x }));
        }
        out
    }

    /// Multiple of the canonical quadratic the shape reduces to.
    pub fn expected_multiple(&self, n: i64) -> Rational {
        let h = n / 2;
        let s = Rational::from_integer(sign_pow(h).into());
        match self {
            QuadShape::WeylLaplacianDivergence | QuadShape::GradDivergencePair { .. } => s,
            QuadShape::DoubleDivergencePair { .. } => s / Rational::from_integer(2.into()),
            QuadShape::DivergencePair { .. } => -s,
            QuadShape::CrossedDivergence { .. } => Rational::from_integer(0.into()),
        }
    }
}

struct Labels(u32);

impl Labels {
    fn next(&mut self) -> u32 {
        self.0 += 1;
        self.0
    }

    fn many(&mut self, k: usize) -> Vec<u32> {
        (0..k).map(|_| self.next()).collect()
    }

    fn lap(&mut self, x: usize) -> Vec<u32> {
        let mut out = vec![];
        for _ in 0..x {
            let a = self.next();
            out.extend([a, a]);
        }
        out
    }
}

fn weyl(derivs: Vec<u32>, intr: [u32; 4]) -> IFactor {
    IFactor::new(FactorKind::Weyl, derivs, intr.to_vec())
}

fn build(f1: IFactor, f2: IFactor) -> Contraction {
    let t = IndexedTerm::new(vec![f1, f2], vec![]);
    Contraction::from_indexed(&t).expect("well-formed").1
}

/// `D^(n/2-3)_r D^s W_sjkl (x) D^(n/2-3) r D_t W^tjkl`
pub fn canonical_quadratic(n: i64) -> Contraction {
    let h = (n / 2) as usize;
    let mut l = Labels(0);
    let r = l.many(h - 3);
    let [s, t, j, k, m] = [l.next(), l.next(), l.next(), l.next(), l.next()];
    let mut d1 = r.clone();
    d1.push(s);
    let mut d2 = r;
    d2.push(t);
    build(weyl(d1, [s, j, k, m]), weyl(d2, [t, j, k, m]))
}

/// Representative contraction of a shape at dimension `n`.
pub fn quadratic_shape(shape: QuadShape, n: i64) -> Contraction {
    let h = (n / 2) as usize;
    let mut l = Labels(0);
    let [i, j, k, m, s, t, a] = [l.next(), l.next(), l.next(), l.next(), l.next(), l.next(), l.next()];
    match shape {
        QuadShape::WeylLaplacianDivergence => {
            let mut d2 = l.lap(h - 3);
            d2.extend([i, t]);
            build(weyl(vec![], [i, j, k, m]), weyl(d2, [t, j, k, m]))
        }
        QuadShape::DoubleDivergencePair { x } => {
            let (s2, t2) = (l.next(), l.next());
            let mut d1 = l.lap(x);
            d1.extend([s, t]);
            let mut d2 = l.lap(h - 4 - x);
            d2.extend([s2, t2]);
            build(weyl(d1, [s, j, t, m]), weyl(d2, [s2, j, t2, m]))
        }
        QuadShape::DivergencePair { x } => {
            let mut d1 = l.lap(x);
            d1.push(s);
            let mut d2 = l.lap(h - 3 - x);
            d2.push(t);
            build(weyl(d1, [s, j, k, m]), weyl(d2, [t, j, k, m]))
        }
        QuadShape::GradDivergencePair { x } => {
            let mut d1 = l.lap(x);
            d1.extend([a, s]);
            let mut d2 = l.lap(h - 4 - x);
            d2.extend([a, t]);
            build(weyl(d1, [s, j, k, m]), weyl(d2, [t, j, k, m]))
        }
        QuadShape::CrossedDivergence { x } => {
            let [b, c, d, al, be] = [l.next(), l.next(), l.next(), l.next(), l.next()];
            let mut d1 = l.lap(x);
            d1.extend([be, a]);
            let mut d2 = l.lap(h - 4 - x);
            d2.extend([b, al]);
            build(weyl(d1, [a, b, c, d]), weyl(d2, [al, be, c, d]))
        }
    }
}

/// Identify the family of a contraction by canonical comparison; `c` equals
/// the sign times the family representative.
pub fn classify_quadratic(c: &Contraction, n: i64) -> Result<(QuadShape, i8), DivError> {
    if n < 6 || n % 2 != 0 {
        return Err(DivError::Shape(format!("dimension {n} must be even and at least 6")));
    }
    let kinds: Vec<_> = c.factors().iter().map(|f| f.kind).collect();
    if kinds != [FactorKind::Weyl, FactorKind::Weyl] {
        return Err(DivError::Shape("expected exactly two Weyl factors".into()));
    }
    if c.weight() != -n {
        return Err(DivError::Shape(format!("weight {} is not -{n}", c.weight())));
    }
    let (sc, cc) = canonicalize(c);
    if sc == 0 {
        return Err(DivError::Shape("contraction vanishes by symmetry".into()));
    }
    let mut cache: HashMap<QuadShape, (i8, Contraction)> = HashMap::new();
    for s in QuadShape::all(n) {
        let (sr, rep) = cache.entry(s).or_insert_with(|| canonicalize(&quadratic_shape(s, n)));
        if *rep == cc {
            return Ok((s, sc * *sr));
        }
    }
    Err(DivError::Shape("no matching family".into()))
}

/// Reduce a handled quadratic Weyl contraction to a multiple of the
/// canonical quadratic modulo an explicit divergence and longer terms.
pub fn reduce_quadratic_weyl(c: &Contraction, n: i64) -> Result<(Rational, DivCertificate), DivError> {
    classify_quadratic(c, n)?;
    let (x, cert) = find_divergence(&LinComb::of(c.clone()), &[canonical_quadratic(n)], n, SearchOpts::default())?;
    Ok((x[0].clone(), cert))
}

fn pair(n: i64, shared: usize, f: impl FnOnce(&mut Labels) -> ([Vec<u32>; 2], [[u32; 4]; 2])) -> Contraction {
    let _ = n;
    let mut l = Labels(0);
    let r = l.many(shared);
    let ([e1, e2], [i1, i2]) = f(&mut l);
    let mut d1 = r.clone();
    d1.extend(e1);
    let mut d2 = r;
    d2.extend(e2);
    build(weyl(d1, i1), weyl(d2, i2))
}

/// `|D^(k) W|^2`
pub fn weyl_gradient_norm(k: usize) -> Contraction {
    pair(0, k, |l| {
        let [i, j, m, o] = [l.next(), l.next(), l.next(), l.next()];
        ([vec![], vec![]], [[i, j, m, o], [i, j, m, o]])
    })
}

/// `D_(r) D_s W_tjkl (x) D^(r) D^t W^sjkl` with `n/2-3` shared derivatives.
pub fn crossed_square(n: i64) -> Contraction {
    pair(n, (n / 2 - 3) as usize, |l| {
        let [s, t, j, k, m] = [l.next(), l.next(), l.next(), l.next(), l.next()];
        ([vec![s], vec![t]], [[t, j, k, m], [s, j, k, m]])
    })
}

/// `D_(r) D_su W_tjky (x) D^(r) D^ty W^sjku` with `n/2-4` shared derivatives.
pub fn crossed_cube(n: i64) -> Contraction {
    pair(n, (n / 2 - 4) as usize, |l| {
        let [s, u, t, j, k, y] = [l.next(), l.next(), l.next(), l.next(), l.next(), l.next()];
        ([vec![s, u], vec![t, y]], [[t, j, k, y], [s, j, k, u]])
    })
}

/// `D_(r) D_a D^l W_ijkl (x) D^(r) D^i D^s W^ajk_s` with `n/2-4` shared derivatives.
pub fn barred_cube(n: i64) -> Contraction {
    pair(n, (n / 2 - 4) as usize, |l| {
        let [a, m, i, s, j, k] = [l.next(), l.next(), l.next(), l.next(), l.next(), l.next()];
        ([vec![a, m], vec![i, s]], [[i, j, k, m], [a, j, k, s]])
    })
}

/// `D_(r) D_s W_ijk^s (x) D^(r) D^t W^ijk_t` with `n/2-3` shared derivatives.
pub fn primed_cube(n: i64) -> Contraction {
    pair(n, (n / 2 - 3) as usize, |l| {
        let [s, t, i, j, k] = [l.next(), l.next(), l.next(), l.next(), l.next()];
        ([vec![s], vec![t]], [[i, j, k, s], [i, j, k, t]])
    })
}
