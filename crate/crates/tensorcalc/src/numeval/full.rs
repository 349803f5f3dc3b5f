//! Full nonlinear evaluation: metric, inverse metric by a Neumann series,
//! Christoffel symbols, curvature and ordered covariant derivatives, all as
//! truncated Taylor series, then contraction at the origin.
//!
//! Intermediate tensors are integral multiples of the true ones (`2 Gamma`,
//! `4 Rm`, and one more factor 2 per covariant derivative); the scale is
//! divided out at the very end.

use std::collections::HashMap;

use num::BigInt;

use super::series::{tp_add, tp_mul, tp_scale, tp_sub, Monos, Series, TP, TZERO};
use super::{JetValue, MetricJet};
use crate::expr::{Contraction, FactorKind};
use crate::ratcoef::Rational;

/// Tensor of series, components flattened row-major.
struct STen {
    rank: usize,
    c: Vec<Series>,
}

fn digits(mut i: usize, n: usize, r: usize) -> Vec<usize> {
    let mut d = vec![0; r];
    for p in (0..r).rev() {
        d[p] = i % n;
        i /= n;
    }
    d
}

fn flat(d: &[usize], n: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * n + x)
}

struct Geometry<'a> {
    jet: &'a MetricJet,
    n: usize,
    dmax: usize,
    mo: Monos,
    kg: usize,
    g: Vec<Series>,
    /// `2 Gamma^a_{bc}` at `a*n*n + b*n + c`.
    g2: Vec<Series>,
}

impl<'a> Geometry<'a> {
    fn new(jet: &'a MetricJet, kg: usize, dmax: usize) -> Self {
        let n = jet.n;
        let mo = Monos::new(n, kg);
        let mut g: Vec<Series> = (0..n * n).map(|_| Series::zero(&mo, kg)).collect();
        let mut hm: Vec<Series> = (0..n * n).map(|_| Series::zero(&mo, kg)).collect();
        for a in 0..n {
            g[a * n + a].c[0][0] = 1;
        }
        if dmax >= 1 {
            for w in &jet.waves {
                if w.p > kg {
                    continue;
                }
                for i in mo.upto[w.p - 1]..mo.upto[w.p] {
                    let ka: i128 = mo.exps[i]
                        .iter()
                        .zip(&w.k)
                        .map(|(&e, &k)| (k as i128).pow(e as u32))
                        .product();
                    if ka == 0 {
                        continue;
                    }
                    for a in 0..n {
                        for b in 0..n {
                            let v = w.e[a][b] as i128 * ka;
                            g[a * n + b].c[i][1] += v;
                            hm[a * n + b].c[i][1] += v;
                        }
                    }
                }
            }
        }
        // g^{-1} = sum_j (-h)^j
        let mut ginv: Vec<Series> = (0..n * n).map(|_| Series::zero(&mo, kg)).collect();
        let mut term: Vec<Series> = (0..n * n).map(|_| Series::zero(&mo, kg)).collect();
        for a in 0..n {
            ginv[a * n + a].c[0][0] = 1;
            term[a * n + a].c[0][0] = 1;
        }
        for _ in 1..=dmax {
            let mut next: Vec<Series> = (0..n * n).map(|_| Series::zero(&mo, kg)).collect();
            for a in 0..n {
                for b in 0..n {
                    let acc = &mut next[a * n + b];
                    for c in 0..n {
                        term[a * n + c].mul_into(&hm[c * n + b], &mo, dmax, acc);
                    }
                    *acc = acc.scale(-1);
                }
            }
            for (gi, t) in ginv.iter_mut().zip(&next) {
                gi.add_assign(t);
            }
            term = next;
        }
        let kc = kg - 1;
        let dg: Vec<Vec<Series>> = g.iter().map(|s| (0..n).map(|a| s.deriv(&mo, a)).collect()).collect();
        let mut low: Vec<Series> = Vec::with_capacity(n * n * n);
        for d in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = dg[d * n + c][b].clone();
                    s.add_assign(&dg[d * n + b][c]);
                    s.sub_assign(&dg[b * n + c][d]);
                    low.push(s);
                }
            }
        }
        let mut g2: Vec<Series> = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = Series::zero(&mo, kc);
                    for d in 0..n {
                        ginv[a * n + d].mul_into(&low[(d * n + b) * n + c], &mo, dmax, &mut acc);
                    }
                    g2.push(acc);
                }
            }
        }
        Geometry {
            jet,
            n,
            dmax,
            mo,
            kg,
            g,
            g2,
        }
    }

    fn gam(&self, a: usize, b: usize, c: usize) -> &Series {
        &self.g2[(a * self.n + b) * self.n + c]
    }

    /// `4 Rm_{abcd}`, valid through degree `kg - 2`.
    fn riemann(&self) -> STen {
        let n = self.n;
        let mo = &self.mo;
        let k = self.kg - 2;
        let mut r4: Vec<Series> = Vec::with_capacity(n.pow(4));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = self.gam(a, d, b).deriv(mo, c).scale(2);
                        s.sub_assign(&self.gam(a, c, b).deriv(mo, d).scale(2));
                        let s = s.truncate(mo, k);
                        let mut plus = s;
                        let mut minus = Series::zero(mo, k);
                        for e in 0..n {
                            self.gam(a, c, e).mul_into(self.gam(e, d, b), mo, self.dmax, &mut plus);
                            self.gam(a, d, e).mul_into(self.gam(e, c, b), mo, self.dmax, &mut minus);
                        }
                        plus.sub_assign(&minus);
                        r4.push(plus);
                    }
                }
            }
        }
        let n3 = n * n * n;
        let mut out = Vec::with_capacity(n.pow(4));
        for a in 0..n {
            for rest in 0..n3 {
                let mut acc = Series::zero(mo, k);
                for e in 0..n {
                    self.g[a * n + e].mul_into(&r4[e * n3 + rest], mo, self.dmax, &mut acc);
                }
                out.push(acc);
            }
        }
        STen { rank: 4, c: out }
    }

    /// `2 nabla T`, the new index first.
    fn nabla(&self, t: &STen) -> STen {
        let n = self.n;
        let mo = &self.mo;
        let r = t.rank;
        let k = t.c[0].k - 1;
        let nr = n.pow(r as u32);
        let mut out = Vec::with_capacity(n * nr);
        for a in 0..n {
            for rest in 0..nr {
                let mut s = t.c[rest].deriv(mo, a).scale(2);
                let mut corr = Series::zero(mo, k);
                let ds = digits(rest, n, r);
                for i in 0..r {
                    let mut dd = ds.clone();
                    for e in 0..n {
                        dd[i] = e;
                        let src = &t.c[flat(&dd, n)];
                        self.gam(e, a, ds[i]).mul_into(src, mo, self.dmax, &mut corr);
                    }
                }
                s.sub_assign(&corr);
                out.push(s);
            }
        }
        STen { rank: r + 1, c: out }
    }

    fn scalar_fn(&self, kind: FactorKind) -> STen {
        let mo = &self.mo;
        let mut s = Series::zero(mo, self.kg);
        if self.dmax >= 1 {
            for w in self.jet.fn_waves(kind) {
                if w.p > self.kg {
                    continue;
                }
                let lo = if w.p == 0 { 0 } else { mo.upto[w.p - 1] };
                for i in lo..mo.upto[w.p] {
                    let ka: i128 = mo.exps[i]
                        .iter()
                        .zip(&w.k)
                        .map(|(&e, &k)| (k as i128).pow(e as u32))
                        .product();
                    s.c[i][1] += w.c as i128 * ka;
                }
            }
        }
        STen { rank: 0, c: vec![s] }
    }
}

fn origin(t: &STen) -> Vec<TP> {
    t.c.iter().map(Series::at_origin).collect()
}

/// Origin values of `nabla^j T` for `j = 0..=m`, with scales.
fn chain(geo: &Geometry, mut t: STen, base_scale: i128, m: usize) -> Vec<(Vec<TP>, i128)> {
    let mut out = vec![(origin(&t), base_scale)];
    let mut sc = base_scale;
    for _ in 0..m {
        t = geo.nabla(&t);
        sc *= 2;
        out.push((origin(&t), sc));
    }
    out
}

/// Dense tensor at the origin with index labels.
struct DT {
    labels: Vec<u32>,
    data: Vec<TP>,
}

fn einsum(ins: &[&DT], out: &[u32], n: usize, dmax: usize) -> DT {
    let mut all: Vec<u32> = out.to_vec();
    for t in ins {
        for &l in &t.labels {
            if !all.contains(&l) {
                all.push(l);
            }
        }
    }
    let strides = |labels: &[u32]| -> Vec<usize> {
        let r = labels.len();
        all.iter()
            .map(|&l| {
                (0..r)
                    .filter(|&p| labels[p] == l)
                    .map(|p| n.pow((r - 1 - p) as u32))
                    .sum()
            })
            .collect()
    };
    let in_str: Vec<Vec<usize>> = ins.iter().map(|t| strides(&t.labels)).collect();
    let out_str = strides(out);
    let l = all.len();
    let mut res = vec![TZERO; n.pow(out.len() as u32)];
    let mut digit = vec![0usize; l];
    let mut offs = vec![0usize; ins.len()];
    let mut ooff = 0usize;
    loop {
        let mut v = ins[0].data[offs[0]];
        for (t, &o) in ins.iter().zip(&offs).skip(1) {
            v = tp_mul(&v, &t.data[o], dmax);
        }
        tp_add(&mut res[ooff], &v);
        // odometer, last label fastest
        let mut p = l;
        loop {
            if p == 0 {
                return DT {
                    labels: out.to_vec(),
                    data: res,
                };
            }
            p -= 1;
            digit[p] += 1;
            for (o, s) in offs.iter_mut().zip(&in_str) {
                *o += s[p];
            }
            ooff += out_str[p];
            if digit[p] < n {
                break;
            }
            for (o, s) in offs.iter_mut().zip(&in_str) {
                *o -= n * s[p];
            }
            ooff -= n * out_str[p];
            digit[p] = 0;
        }
    }
}

fn once_labels(labels: &[u32]) -> Vec<u32> {
    let mut out = vec![];
    for &l in labels {
        if labels.iter().filter(|&&x| x == l).count() == 1 {
            out.push(l);
        }
    }
    out
}

/// Origin tensor of one factor as `data / scale`.
fn factor_tensor(
    kind: FactorKind,
    m: usize,
    n: usize,
    rm: &[(Vec<TP>, i128)],
    fns: &HashMap<FactorKind, Vec<(Vec<TP>, i128)>>,
) -> (Vec<TP>, i128) {
    let nd = n.pow(m as u32);
    let ni = n as i128;
    let l = 2 * (ni - 1) * (ni - 2);
    let ric = |d: &[TP]| -> Vec<TP> {
        let mut out = vec![TZERO; nd * n * n];
        for x in 0..nd {
            for b in 0..n {
                for e in 0..n {
                    let mut acc = TZERO;
                    for a in 0..n {
                        tp_add(&mut acc, &d[flat(&[x, a, b, a, e], n)]);
                    }
                    out[(x * n + b) * n + e] = acc;
                }
            }
        }
        out
    };
    let scal = |ric: &[TP]| -> Vec<TP> {
        (0..nd)
            .map(|x| {
                let mut acc = TZERO;
                for b in 0..n {
                    tp_add(&mut acc, &ric[(x * n + b) * n + b]);
                }
                acc
            })
            .collect()
    };
    // L P = 2(n-1) Ric - R delta
    let schouten = |ric: &[TP], r: &[TP]| -> Vec<TP> {
        let mut out: Vec<TP> = ric.iter().map(|v| tp_scale(v, 2 * (ni - 1))).collect();
        for x in 0..nd {
            for b in 0..n {
                tp_sub(&mut out[(x * n + b) * n + b], &r[x]);
            }
        }
        out
    };
    match kind {
        FactorKind::Riemann => rm[m].clone(),
        FactorKind::Ricci => (ric(&rm[m].0), rm[m].1),
        FactorKind::ScalarCurv => (scal(&ric(&rm[m].0)), rm[m].1),
        FactorKind::Schouten => {
            let rc = ric(&rm[m].0);
            let r = scal(&rc);
            (schouten(&rc, &r), rm[m].1 * l)
        }
        FactorKind::Weyl => {
            let (d, sc) = &rm[m];
            let rc = ric(&rm[m].0);
            let p = schouten(&rc, &scal(&rc));
            let pi = |x: usize, a: usize, b: usize| p[(x * n + a) * n + b];
            let mut out: Vec<TP> = d.iter().map(|v| tp_scale(v, l)).collect();
            for x in 0..nd {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            for e in 0..n {
                                let o = &mut out[flat(&[x, a, b, c, e], n)];
                                if b == e {
                                    tp_sub(o, &pi(x, a, c));
                                }
                                if a == c {
                                    tp_sub(o, &pi(x, b, e));
                                }
                                if b == c {
                                    tp_add(o, &pi(x, a, e));
                                }
                                if a == e {
                                    tp_add(o, &pi(x, b, c));
                                }
                            }
                        }
                    }
                }
            }
            (out, sc * l)
        }
        FactorKind::ScalarFn(_) | FactorKind::AuxFn => fns[&kind][m].clone(),
        FactorKind::Metric => {
            let mut out = vec![TZERO; n * n];
            for a in 0..n {
                out[a * n + a][0] = 1;
            }
            (out, 1)
        }
        FactorKind::Perturbation => unreachable!("checked by the caller"),
    }
}

pub(super) fn evaluate(c: &Contraction, jet: &MetricJet, dmax: usize) -> JetValue {
    let n = jet.n;
    let mc = c
        .factors()
        .iter()
        .filter(|f| matches!(f.kind, FactorKind::Riemann | FactorKind::Weyl | FactorKind::Ricci | FactorKind::Schouten | FactorKind::ScalarCurv))
        .map(|f| f.m)
        .max();
    let mut fneed: HashMap<FactorKind, usize> = HashMap::new();
    for f in c.factors() {
        if matches!(f.kind, FactorKind::ScalarFn(_) | FactorKind::AuxFn) {
            let e = fneed.entry(f.kind).or_insert(0);
            *e = (*e).max(f.m);
        }
    }
    let mf = fneed.values().copied().max().unwrap_or(0);
    let kg = mc.map_or(0, |m| m + 2).max(mf + 1).max(2);
    let geo = Geometry::new(jet, kg, dmax);
    let rm = match mc {
        Some(m) => chain(&geo, geo.riemann(), 4, m),
        None => vec![],
    };
    let fns: HashMap<FactorKind, Vec<(Vec<TP>, i128)>> =
        fneed.iter().map(|(&k, &m)| (k, chain(&geo, geo.scalar_fn(k), 1, m))).collect();

    let it = c.to_indexed();
    let mut scale = BigInt::from(1);
    let mut pending: Vec<DT> = vec![];
    for (f, fi) in c.factors().iter().zip(&it.factors) {
        let (data, sc) = factor_tensor(f.kind, f.m, n, &rm, &fns);
        scale *= sc;
        let labels: Vec<u32> = fi.labels().collect();
        let dt = DT { labels, data };
        let once = once_labels(&dt.labels);
        let dt = if once.len() < dt.labels.len() {
            einsum(&[&dt], &once, n, dmax)
        } else {
            dt
        };
        pending.push(dt);
    }
    let mut acc = DT {
        labels: vec![],
        data: vec![{
            let mut one = TZERO;
            one[0] = 1;
            one
        }],
    };
    while !pending.is_empty() {
        // merge the pending tensor sharing most labels with the accumulator
        let (best, _) = pending
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let shared = t.labels.iter().filter(|l| acc.labels.contains(l)).count();
                (i, shared as i64 * 64 - t.labels.len() as i64)
            })
            .max_by_key(|&(i, s)| (s, std::cmp::Reverse(i)))
            .unwrap();
        let t = pending.swap_remove(best);
        let mut both = acc.labels.clone();
        both.extend(&t.labels);
        let out = once_labels(&both);
        acc = einsum(&[&acc, &t], &out, n, dmax);
    }
    let v = acc.data[0];
    let scale = Rational::from_integer(scale);
    JetValue((0..=dmax).map(|d| Rational::from_integer(BigInt::from(v[d])) / &scale).collect())
}

/// Nonzero entry counts of the first and second Bianchi residuals of the
/// computed curvature at the origin.
pub fn bianchi_residuals(jet: &MetricJet, dmax: usize) -> (usize, usize) {
    let n = jet.n;
    let geo = Geometry::new(jet, 3, dmax);
    let rm = geo.riemann();
    let d0 = origin(&rm);
    let d1 = origin(&geo.nabla(&rm));
    let r = |a, b, c, d| d0[flat(&[a, b, c, d], n)];
    // 2 nabla (4 Rm)
    let dr = |e, a, b, c, d| d1[flat(&[e, a, b, c, d], n)];
    let mut first = 0;
    let mut second = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = r(a, b, c, d);
                    tp_add(&mut s, &r(a, c, d, b));
                    tp_add(&mut s, &r(a, d, b, c));
                    if s != TZERO {
                        first += 1;
                    }
                    for e in 0..n {
                        let mut s = dr(e, a, b, c, d);
                        tp_add(&mut s, &dr(c, a, b, d, e));
                        tp_add(&mut s, &dr(d, a, b, e, c));
                        if s != TZERO {
                            second += 1;
                        }
                    }
                }
            }
        }
    }
    (first, second)
}
