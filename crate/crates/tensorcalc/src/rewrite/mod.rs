//! Identity rules on contractions and normalization.
//!
//! Every rule acts on one factor of one contraction and returns the
//! replacement as raw (uncanonicalized) terms, so that ordered derivatives
//! survive for exact numeric checks. Rules marked exact hold as tensor
//! identities; the others hold modulo longer contractions.
//!
//! Orientation used by [`normalize`]: Weyl is expanded into Riemann and
//! Schouten, Schouten into Ricci and scalar curvature, traces are resolved,
//! and the first Bianchi identity removes the largest of three cyclic forms.

mod manifest;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::linalg::reduce_leading;
use crate::expr::linearize::{inv_n2, j_coef};
use crate::expr::{Contraction, ExprError, FactorKind, IFactor, LinComb};
use crate::ratcoef::{DimPoly, DimRatio};

pub use manifest::{manifest, ManifestRule};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("{rule} does not apply: {why}")]
    NotApplicable { rule: &'static str, why: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("normalization stopped after {steps} rule applications; last: {trace:?}")]
    IterationCap { steps: usize, trace: Vec<String> },
    #[error("unknown rule {0}")]
    UnknownRule(String),
}

fn na(rule: &'static str, why: impl Into<String>) -> RewriteError {
    RewriteError::NotApplicable { rule, why: why.into() }
}

/// What happens to terms longer than the tracked length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Discard,
    Track,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradePolicy {
    pub sigma_max: usize,
    pub mode: Mode,
}

impl GradePolicy {
    pub fn discard(sigma_max: usize) -> Self {
        GradePolicy { sigma_max, mode: Mode::Discard }
    }

    pub fn track(sigma_max: usize) -> Self {
        GradePolicy { sigma_max, mode: Mode::Track }
    }
}

/// Result of one rule application. `main` has the length of the input;
/// `corrections` are longer terms kept in track mode; `truncated` counts
/// correction terms dropped in discard mode.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rewritten {
    pub main: LinComb,
    pub corrections: LinComb,
    pub truncated: usize,
}

impl Rewritten {
    fn exact(main: LinComb) -> Self {
        Rewritten {
            main,
            ..Default::default()
        }
    }

    /// `main + corrections`.
    pub fn total(&self) -> LinComb {
        let mut out = self.main.clone();
        out.extend(&self.corrections);
        out
    }
}

type Expansion = Vec<(DimRatio, Vec<IFactor>)>;

struct Fresh(u32);

impl Fresh {
    fn next(&mut self) -> u32 {
        self.0 += 1;
        self.0 - 1
    }
}

fn one() -> DimRatio {
    DimRatio::one()
}

fn minus() -> DimRatio {
    DimRatio::from_int(-1)
}

fn g(a: u32, b: u32) -> IFactor {
    IFactor::new(FactorKind::Metric, vec![], vec![a, b])
}

fn cat(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// Replace factor `at` by each expansion in turn.
fn substitute<F>(c: &Contraction, at: usize, rule: &'static str, kind: Option<FactorKind>, f: F) -> Result<LinComb, RewriteError>
where
    F: FnOnce(&IFactor, &mut Fresh) -> Result<Expansion, RewriteError>,
{
    let t = c.to_indexed();
    let fac = t.factors.get(at).ok_or_else(|| na(rule, format!("no factor at position {at}")))?;
    if let Some(k) = kind {
        if fac.kind != k {
            return Err(na(rule, format!("factor {at} is {}, not {}", fac.kind, k)));
        }
    }
    let mut fresh = Fresh(t.fresh());
    let exp = f(fac, &mut fresh)?;
    let mut out = LinComb::zero();
    for (k, fs) in exp {
        let mut u = t.clone();
        u.factors.splice(at..=at, fs);
        out.push_indexed(k, &u)?;
    }
    let w = c.weight();
    assert!(out.terms.iter().all(|(_, d)| d.weight() == w), "{rule} changed the weight");
    Ok(out)
}

/// `W = Rm - P (wedge) g`. Exact.
pub fn weyl_decompose(c: &Contraction, at: usize) -> Result<Rewritten, RewriteError> {
    let main = substitute(c, at, "weyl_decompose", Some(FactorKind::Weyl), |f, _| {
        let d = &f.derivs;
        let [a, b, cc, e] = [f.intr[0], f.intr[1], f.intr[2], f.intr[3]];
        let p = |x, y| IFactor::new(FactorKind::Schouten, d.clone(), vec![x, y]);
        Ok(vec![
            (one(), vec![IFactor::new(FactorKind::Riemann, d.clone(), f.intr.clone())]),
            (minus(), vec![p(a, cc), g(b, e)]),
            (minus(), vec![p(b, e), g(a, cc)]),
            (one(), vec![p(a, e), g(b, cc)]),
            (one(), vec![p(b, cc), g(a, e)]),
        ])
    })?;
    Ok(Rewritten::exact(main))
}

/// `P = (Ric - R g / (2(n-1))) / (n-2)`. Exact.
pub fn schouten_to_ricci(c: &Contraction, at: usize) -> Result<Rewritten, RewriteError> {
    let main = substitute(c, at, "schouten_to_ricci", Some(FactorKind::Schouten), |f, _| {
        let d = &f.derivs;
        Ok(vec![
            (inv_n2(), vec![IFactor::new(FactorKind::Ricci, d.clone(), f.intr.clone())]),
            (
                -&(&inv_n2() * &j_coef()),
                vec![IFactor::new(FactorKind::ScalarCurv, d.clone(), vec![]), g(f.intr[0], f.intr[1])],
            ),
        ])
    })?;
    Ok(Rewritten::exact(main))
}

/// `Ric = (n-2) P + P^x_x g`. Exact.
pub fn ricci_to_schouten(c: &Contraction, at: usize) -> Result<Rewritten, RewriteError> {
    let main = substitute(c, at, "ricci_to_schouten", Some(FactorKind::Ricci), |f, fresh| {
        let d = &f.derivs;
        let x = fresh.next();
        Ok(vec![
            (
                DimRatio::from_poly(DimPoly::n_minus(2)),
                vec![IFactor::new(FactorKind::Schouten, d.clone(), f.intr.clone())],
            ),
            (
                one(),
                vec![IFactor::new(FactorKind::Schouten, d.clone(), vec![x, x]), g(f.intr[0], f.intr[1])],
            ),
        ])
    })?;
    Ok(Rewritten::exact(main))
}

/// Cotton identity on the innermost derivative of a Schouten factor and
/// intrinsic slot `slot`:
/// `D_c P_ab = D_a P_cb + 1/(3-n) D^s W_cabs`. Exact.
pub fn cotton_identity(c: &Contraction, at: usize, slot: usize) -> Result<Rewritten, RewriteError> {
    const RULE: &str = "cotton_identity";
    if slot > 1 {
        return Err(na(RULE, "Schouten has intrinsic slots 0 and 1"));
    }
    let main = substitute(c, at, RULE, Some(FactorKind::Schouten), |f, fresh| {
        let m = f.derivs.len();
        if m == 0 {
            return Err(na(RULE, "the Schouten factor carries no derivative"));
        }
        let outer = &f.derivs[..m - 1];
        let cl = f.derivs[m - 1];
        let (a, b) = (f.intr[slot], f.intr[1 - slot]);
        let s = fresh.next();
        let k = DimRatio::new(DimPoly::one(), DimPoly::affine(-1, 3)).expect("nonzero denominator");
        Ok(vec![
            (one(), vec![IFactor::new(FactorKind::Schouten, cat(outer, &[a]), vec![cl, b])]),
            (k, vec![IFactor::new(FactorKind::Weyl, cat(outer, &[s]), vec![cl, a, b, s])]),
        ])
    })?;
    Ok(Rewritten::exact(main))
}

/// `D^a P_ac = D_c P^x_x`, in either direction, on the innermost
/// derivative. When the divergence sits on another derivative slot the
/// derivative block is treated as symmetric.
pub fn contracted_bianchi(c: &Contraction, at: usize) -> Result<Rewritten, RewriteError> {
    const RULE: &str = "contracted_bianchi";
    let main = substitute(c, at, RULE, Some(FactorKind::Schouten), |f, fresh| {
        let m = f.derivs.len();
        if m == 0 {
            return Err(na(RULE, "the Schouten factor carries no derivative"));
        }
        let [a, b] = [f.intr[0], f.intr[1]];
        if a == b {
            let y = fresh.next();
            let mut d = f.derivs.clone();
            let cl = d[m - 1];
            d[m - 1] = y;
            return Ok(vec![(one(), vec![IFactor::new(FactorKind::Schouten, d, vec![y, cl])])]);
        }
        let hit = (0..m).rev().find(|&j| f.derivs[j] == a || f.derivs[j] == b);
        let Some(j) = hit else {
            return Err(na(RULE, "no trace and no divergence on the Schouten factor"));
        };
        let other = if f.derivs[j] == a { b } else { a };
        let x = fresh.next();
        let mut d = f.derivs.clone();
        d.remove(j);
        d.push(other);
        Ok(vec![(one(), vec![IFactor::new(FactorKind::Schouten, d, vec![x, x])])])
    })?;
    Ok(Rewritten::exact(main))
}

/// Terms of `D_outer [D_c, D_d] U` where the factor's derivatives are
/// `outer, c, d, inner`:
/// `[D_c, D_d] U_{..b..} = - sum Rm_{e b c d} U_{..e..}`.
fn commutator_terms(t: &crate::expr::IndexedTerm, at: usize, p: usize, out: &mut LinComb) -> Result<(), ExprError> {
    let f = &t.factors[at];
    let outer = &f.derivs[..p];
    let (cl, dl) = (f.derivs[p], f.derivs[p + 1]);
    let inner = &f.derivs[p + 2..];
    let e = t.fresh();
    let ni = inner.len();
    for i in 0..ni + f.intr.len() {
        let bi = if i < ni { inner[i] } else { f.intr[i - ni] };
        let mut inner2 = inner.to_vec();
        let mut intr2 = f.intr.clone();
        if i < ni {
            inner2[i] = e;
        } else {
            intr2[i - ni] = e;
        }
        for mask in 0u32..(1 << p) {
            let on_rm: Vec<u32> = (0..p).filter(|k| mask >> k & 1 == 1).map(|k| outer[k]).collect();
            let on_u: Vec<u32> = (0..p).filter(|k| mask >> k & 1 == 0).map(|k| outer[k]).collect();
            let rm = IFactor::new(FactorKind::Riemann, on_rm, vec![e, bi, cl, dl]);
            let u = IFactor::new(f.kind, cat(&on_u, &inner2), intr2.clone());
            let mut v = t.clone();
            v.factors.splice(at..=at, [rm, u]);
            out.push_indexed(minus(), &v)?;
        }
    }
    Ok(())
}

/// Exchange derivative slots `i` and `j` of factor `at`. The main term is
/// the exchanged contraction; commutator terms (one Riemann factor longer)
/// go to `corrections` in track mode and are counted in `truncated` in
/// discard mode.
pub fn commute_derivatives(c: &Contraction, at: usize, i: usize, j: usize, mode: Mode) -> Result<Rewritten, RewriteError> {
    const RULE: &str = "commute_derivatives";
    let (i, j) = (i.min(j), i.max(j));
    let mut t = c.to_indexed();
    let f = t.factors.get(at).ok_or_else(|| na(RULE, format!("no factor at position {at}")))?;
    let m = f.derivs.len();
    if i == j || j >= m {
        return Err(na(RULE, format!("need two distinct derivative slots below {m}, got {i} and {j}")));
    }
    if f.kind == FactorKind::Metric {
        return Err(na(RULE, "metric factors carry no derivatives"));
    }
    let mut swaps: Vec<usize> = (i..j).rev().collect();
    swaps.extend(i + 1..j);
    let mut corr = LinComb::zero();
    for p in swaps {
        commutator_terms(&t, at, p, &mut corr)?;
        t.factors[at].derivs.swap(p, p + 1);
    }
    let mut main = LinComb::zero();
    main.push_indexed(one(), &t)?;
    Ok(match mode {
        Mode::Track => Rewritten {
            main,
            corrections: corr,
            truncated: 0,
        },
        Mode::Discard => Rewritten {
            main,
            corrections: LinComb::zero(),
            truncated: corr.collect().len(),
        },
    })
}

/// Second Bianchi identity for Weyl, on the innermost derivative:
/// `D_e W_abcd = -D_c W_abde - D_d W_abec + 1/(n-3) (g (x) D^s W terms)`.
/// Exact.
pub fn fake_second_bianchi(c: &Contraction, at: usize) -> Result<Rewritten, RewriteError> {
    const RULE: &str = "fake_second_bianchi";
    let main = substitute(c, at, RULE, Some(FactorKind::Weyl), |f, fresh| {
        let m = f.derivs.len();
        if m == 0 {
            return Err(na(RULE, "the Weyl factor carries no derivative"));
        }
        let r = &f.derivs[..m - 1];
        let e = f.derivs[m - 1];
        let [a, b, cc, d] = [f.intr[0], f.intr[1], f.intr[2], f.intr[3]];
        let s = fresh.next();
        let w = |dd: u32, i: [u32; 4]| IFactor::new(FactorKind::Weyl, cat(r, &[dd]), i.to_vec());
        let k = DimRatio::inv_n_minus(3);
        let mut out = vec![(minus(), vec![w(cc, [a, b, d, e])]), (minus(), vec![w(d, [a, b, e, cc])])];
        for (x, y, i) in [
            (b, d, [e, cc, a, s]),
            (a, cc, [e, d, b, s]),
            (b, cc, [d, e, a, s]),
            (a, d, [cc, e, b, s]),
            (b, e, [cc, d, a, s]),
            (a, e, [d, cc, b, s]),
        ] {
            out.push((k.clone(), vec![g(x, y), w(s, i)]));
        }
        Ok(out)
    })?;
    Ok(Rewritten::exact(main))
}

/// `(n-3)/(n-2)`, the Riemann part of a doubly contracted Weyl divergence.
pub fn weyl_divergence_rm_coef() -> DimRatio {
    DimRatio::new(DimPoly::n_minus(3), DimPoly::n_minus(2)).expect("nonzero denominator")
}

/// Constants `(c1, c2)` in
/// `D^{il} W_ijkl = (n-3)/(n-2) D^{il} Rm_ijkl + c1 D_jk R + c2 g_jk D^s_s R`
/// modulo longer contractions.
pub fn weyl_divergence_constants() -> (DimRatio, DimRatio) {
    let den = DimPoly::from_ints(&[4, -6, 2]);
    (
        DimRatio::new(DimPoly::affine(-1, 3), den.clone()).expect("nonzero denominator"),
        DimRatio::new(DimPoly::n_minus(3), den).expect("nonzero denominator"),
    )
}

/// Expand a Weyl factor two of whose derivatives contract into one slot of
/// each antisymmetric pair. Holds modulo longer contractions.
pub fn weyl_double_divergence(c: &Contraction, at: usize) -> Result<Rewritten, RewriteError> {
    const RULE: &str = "weyl_double_divergence";
    let main = substitute(c, at, RULE, Some(FactorKind::Weyl), |f, fresh| {
        let pos = |x: usize| f.derivs.iter().position(|&l| l == f.intr[x]);
        let first = [0, 1].into_iter().find_map(|x| pos(x).map(|p| (x, p)));
        let second = [3, 2].into_iter().find_map(|y| pos(y).map(|q| (y, q)));
        let (Some((x, p)), Some((y, q))) = (first, second) else {
            return Err(na(RULE, "the Weyl factor is not a double divergence"));
        };
        let sign = if (x == 1) ^ (y == 2) { minus() } else { one() };
        let (i, l) = (f.intr[x], f.intr[y]);
        let (j, k) = (f.intr[1 - x], f.intr[5 - y]);
        let r: Vec<u32> = (0..f.derivs.len()).filter(|&z| z != p && z != q).map(|z| f.derivs[z]).collect();
        let (c1, c2) = weyl_divergence_constants();
        let s = fresh.next();
        Ok(vec![
            (
                &sign * &weyl_divergence_rm_coef(),
                vec![IFactor::new(FactorKind::Riemann, cat(&r, &[i, l]), vec![i, j, k, l])],
            ),
            (&sign * &c1, vec![IFactor::new(FactorKind::ScalarCurv, cat(&r, &[j, k]), vec![])]),
            (
                &sign * &c2,
                vec![IFactor::new(FactorKind::ScalarCurv, cat(&r, &[s, s]), vec![]), g(j, k)],
            ),
        ])
    })?;
    Ok(Rewritten::exact(main))
}

/// Rule names accepted by [`apply_rule`].
pub const RULE_NAMES: &[&str] = &[
    "weyl_decompose",
    "schouten_to_ricci",
    "ricci_to_schouten",
    "cotton_identity",
    "contracted_bianchi",
    "commute_derivatives",
    "fake_second_bianchi",
    "weyl_double_divergence",
];

/// Apply a rule by name. `args` are the extra slot arguments: the
/// intrinsic slot for the Cotton identity, the two derivative slots for
/// commutation.
pub fn apply_rule(name: &str, c: &Contraction, at: usize, args: &[usize], mode: Mode) -> Result<Rewritten, RewriteError> {
    match name {
        "weyl_decompose" => weyl_decompose(c, at),
        "schouten_to_ricci" => schouten_to_ricci(c, at),
        "ricci_to_schouten" => ricci_to_schouten(c, at),
        "cotton_identity" => cotton_identity(c, at, args.first().copied().unwrap_or(0)),
        "contracted_bianchi" => contracted_bianchi(c, at),
        "commute_derivatives" => {
            let (i, j) = match args {
                [i, j, ..] => (*i, *j),
                _ => (0, 1),
            };
            commute_derivatives(c, at, i, j, mode)
        }
        "fake_second_bianchi" => fake_second_bianchi(c, at),
        "weyl_double_divergence" => weyl_double_divergence(c, at),
        _ => Err(RewriteError::UnknownRule(name.to_string())),
    }
}

/// Which normalization steps run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    /// Weyl to Riemann and Schouten, Schouten to Ricci.
    pub downhill: bool,
    pub first_bianchi: bool,
    pub max_steps: usize,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            downhill: true,
            first_bianchi: true,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub lc: LinComb,
    /// Terms dropped for exceeding `sigma_max`.
    pub truncated: usize,
}

struct Budget {
    steps: usize,
    max: usize,
    trace: Vec<String>,
}

impl Budget {
    fn tick(&mut self, what: String) -> Result<(), RewriteError> {
        self.steps += 1;
        if self.trace.len() == 8 {
            self.trace.remove(0);
        }
        self.trace.push(what);
        if self.steps > self.max {
            return Err(RewriteError::IterationCap {
                steps: self.steps,
                trace: self.trace.clone(),
            });
        }
        Ok(())
    }
}

fn downhill(lc: &LinComb, budget: &mut Budget) -> Result<LinComb, RewriteError> {
    let mut work = lc.terms.clone();
    let mut done = LinComb::zero();
    while let Some((k, c)) = work.pop() {
        let step = if let Some(&at) = c.positions(FactorKind::Weyl).first() {
            Some(("weyl_decompose", weyl_decompose(&c, at)?))
        } else if let Some(&at) = c.positions(FactorKind::Schouten).first() {
            Some(("schouten_to_ricci", schouten_to_ricci(&c, at)?))
        } else {
            None
        };
        match step {
            Some((name, r)) => {
                budget.tick(name.to_string())?;
                work.extend(r.main.terms.into_iter().map(|(k2, d)| (&k * &k2, d)));
            }
            None => done.push(k, c),
        }
    }
    Ok(done.collect())
}

/// Cyclic partners `Rm_{a c d b}`, `Rm_{a d b c}` of the Riemann factor `fi`.
fn cyclic_partners(c: &Contraction, fi: usize) -> [Contraction; 2] {
    let t = c.to_indexed();
    let i = t.factors[fi].intr.clone();
    let mk = |p: [usize; 4]| {
        let mut u = t.clone();
        u.factors[fi].intr = p.iter().map(|&k| i[k]).collect();
        Contraction::from_indexed(&u).expect("permuted slots stay valid").1
    };
    [mk([0, 2, 3, 1]), mk([0, 3, 1, 2])]
}

/// Use the cyclic identity on a Riemann factor to eliminate any term that
/// is strictly the largest contraction in its relation, until none is left.
pub fn first_bianchi_pass(lc: &LinComb) -> LinComb {
    let mut cur = lc.collect();
    'outer: loop {
        for (ti, (k, c)) in cur.terms.iter().enumerate() {
            for fi in c.positions(FactorKind::Riemann) {
                let [p2, p3] = cyclic_partners(c, fi);
                let mut rel = LinComb::single(one(), c.clone());
                rel.push(one(), p2);
                rel.push(one(), p3);
                let rel = rel.collect();
                let Some(own) = rel.terms.iter().find(|(_, d)| d == c).map(|(x, _)| x.clone()) else {
                    continue;
                };
                if rel.terms.iter().any(|(_, d)| d > c) {
                    continue;
                }
                let f = -&k.checked_div(&own).expect("nonzero coefficient");
                let mut next = cur.clone();
                next.terms.remove(ti);
                for (x, d) in &rel.terms {
                    if d != c {
                        next.push(&f * x, d.clone());
                    }
                }
                cur = next.collect();
                continue 'outer;
            }
        }
        return cur;
    }
}

/// Normal form under the rule set. In discard mode terms longer than
/// `sigma_max` are dropped and terms of length exactly `sigma_max` are
/// reduced modulo longer contractions; track mode keeps everything and
/// only applies exact rules.
pub fn normalize(lc: &LinComb, rules: &RuleSet, policy: &GradePolicy) -> Result<Normalized, RewriteError> {
    let mut budget = Budget {
        steps: 0,
        max: rules.max_steps,
        trace: vec![],
    };
    let mut cur = lc.resolve_traces();
    if rules.downhill {
        cur = downhill(&cur, &mut budget)?;
        cur = cur.resolve_traces();
    }
    if rules.first_bianchi {
        cur = first_bianchi_pass(&cur);
    }
    let mut truncated = 0;
    if policy.mode == Mode::Discard {
        let before = cur.len();
        cur = cur.select(|c| c.sigma() <= policy.sigma_max);
        truncated = before - cur.len();
        let top = reduce_leading(&cur.at_length(policy.sigma_max));
        let mut out = cur.select(|c| c.sigma() < policy.sigma_max);
        out.extend(&top);
        cur = out.collect();
    }
    Ok(Normalized { lc: cur, truncated })
}

#[cfg(test)]
mod tests;
