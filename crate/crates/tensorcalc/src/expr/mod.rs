//! Tensor expressions: complete and partial contractions of covariantly
//! differentiated curvature tensors, scalar functions and metrics.
//!
//! A [`Contraction`] stores factors plus, for every slot, the slot it is
//! paired with or the number of the free index it carries. Each factor's
//! slots are its `m` derivative slots (outermost first) followed by its
//! intrinsic slots. Index names never appear here; [`IndexedTerm`] is the
//! label-based form used to build and rewrite terms.

mod canonical;
pub mod linalg;
pub mod linearize;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ratcoef::DimRatio;

pub use canonical::{canonicalize, resolve_traces};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("factor {kind} takes {expected} intrinsic indices, got {got}")]
    Arity {
        kind: String,
        expected: usize,
        got: usize,
    },
    #[error("index {0} appears more than twice")]
    Overused(String),
    #[error("free index {0} is not used by any factor")]
    DanglingFree(String),
    #[error("index {0} appears once but is not declared free")]
    Undeclared(String),
    #[error("expected exactly one free index, found {0}")]
    NotVectorField(usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorKind {
    Riemann,
    Weyl,
    Ricci,
    Schouten,
    ScalarCurv,
    /// `psi_h`
    ScalarFn(u32),
    AuxFn,
    Metric,
    /// Metric perturbation `h`, only produced by linearization.
    Perturbation,
}

impl FactorKind {
    pub fn intrinsic(self) -> usize {
        match self {
            FactorKind::Riemann | FactorKind::Weyl => 4,
            FactorKind::Ricci | FactorKind::Schouten | FactorKind::Metric | FactorKind::Perturbation => 2,
            FactorKind::ScalarCurv | FactorKind::ScalarFn(_) | FactorKind::AuxFn => 0,
        }
    }

    pub fn is_four_slot(self) -> bool {
        self.intrinsic() == 4
    }

    pub fn is_scalar_fn(self) -> bool {
        matches!(self, FactorKind::ScalarFn(_))
    }

    pub(crate) fn code(self) -> (u32, u32) {
        match self {
            FactorKind::Weyl => (0, 0),
            FactorKind::Riemann => (1, 0),
            FactorKind::Schouten => (2, 0),
            FactorKind::Ricci => (3, 0),
            FactorKind::ScalarCurv => (4, 0),
            FactorKind::ScalarFn(h) => (5, h),
            FactorKind::AuxFn => (6, 0),
            FactorKind::Perturbation => (7, 0),
            FactorKind::Metric => (8, 0),
        }
    }

    /// Name in the text grammar.
    pub fn name(self) -> String {
        match self {
            FactorKind::Riemann => "Rm".into(),
            FactorKind::Weyl => "W".into(),
            FactorKind::Ricci => "Ric".into(),
            FactorKind::Schouten => "P".into(),
            FactorKind::ScalarCurv => "R".into(),
            FactorKind::ScalarFn(h) => format!("psi{h}"),
            FactorKind::AuxFn => "Omega".into(),
            FactorKind::Metric => "g".into(),
            FactorKind::Perturbation => "h".into(),
        }
    }

    pub fn from_name(s: &str) -> Option<FactorKind> {
        Some(match s {
            "Rm" => FactorKind::Riemann,
            "W" => FactorKind::Weyl,
            "Ric" => FactorKind::Ricci,
            "P" => FactorKind::Schouten,
            "R" => FactorKind::ScalarCurv,
            "Omega" => FactorKind::AuxFn,
            "g" => FactorKind::Metric,
            "h" => FactorKind::Perturbation,
            _ => {
                let h = s.strip_prefix("psi")?;
                if h.is_empty() || !h.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                FactorKind::ScalarFn(h.parse().ok()?)
            }
        })
    }
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub kind: FactorKind,
    pub m: usize,
}

impl Factor {
    pub fn new(kind: FactorKind, m: usize) -> Self {
        Factor { kind, m }
    }

    pub fn slots(&self) -> usize {
        self.m + self.kind.intrinsic()
    }

    pub fn is_deriv(&self, s: usize) -> bool {
        s < self.m
    }

    /// Contribution to the weight.
    pub fn weight(&self) -> i64 {
        let w = match self.kind {
            FactorKind::Riemann
            | FactorKind::Weyl
            | FactorKind::Ricci
            | FactorKind::Schouten
            | FactorKind::ScalarCurv => self.m + 2,
            FactorKind::ScalarFn(_) | FactorKind::AuxFn | FactorKind::Perturbation => self.m,
            FactorKind::Metric => 0,
        };
        -(w as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotId {
    pub factor: usize,
    pub slot: usize,
}

impl SlotId {
    pub fn new(factor: usize, slot: usize) -> Self {
        SlotId { factor, slot }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Link {
    Free(usize),
    Slot(SlotId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Contraction {
    factors: Vec<Factor>,
    links: Vec<Vec<Link>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Stats {
    pub sigma: usize,
    pub delta: usize,
    pub delta_bar: usize,
    pub q: usize,
    pub weight: i64,
}

impl Contraction {
    /// Validating constructor.
    pub fn new(factors: Vec<Factor>, links: Vec<Vec<Link>>) -> Result<Self, ExprError> {
        let c = Contraction { factors, links };
        c.validate()?;
        Ok(c)
    }

    pub(crate) fn from_parts_unchecked(factors: Vec<Factor>, links: Vec<Vec<Link>>) -> Self {
        Contraction { factors, links }
    }

    /// The empty contraction, standing for the constant 1.
    pub fn unit() -> Self {
        Contraction {
            factors: vec![],
            links: vec![],
        }
    }

    pub fn validate(&self) -> Result<(), ExprError> {
        if self.factors.len() != self.links.len() {
            return Err(ExprError::Invalid("factor and link tables differ in length".into()));
        }
        let mut frees = vec![];
        for (fi, (f, ls)) in self.factors.iter().zip(&self.links).enumerate() {
            if ls.len() != f.slots() {
                return Err(ExprError::Invalid(format!("factor {fi} has the wrong slot count")));
            }
            if f.kind == FactorKind::Metric && f.m > 0 {
                return Err(ExprError::Invalid("metric factors carry no derivatives".into()));
            }
            for (si, l) in ls.iter().enumerate() {
                match *l {
                    Link::Free(k) => frees.push(k),
                    Link::Slot(t) => {
                        let back = self
                            .links
                            .get(t.factor)
                            .and_then(|v| v.get(t.slot))
                            .copied();
                        if back != Some(Link::Slot(SlotId::new(fi, si))) || (t.factor == fi && t.slot == si) {
                            return Err(ExprError::Invalid(format!(
                                "slot ({fi},{si}) is not symmetrically paired"
                            )));
                        }
                    }
                }
            }
        }
        frees.sort_unstable();
        if frees.iter().enumerate().any(|(i, &k)| i != k) {
            return Err(ExprError::Invalid("free indices must be numbered 0..k once each".into()));
        }
        Ok(())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn links(&self) -> &[Vec<Link>] {
        &self.links
    }

    pub fn link(&self, s: SlotId) -> Link {
        self.links[s.factor][s.slot]
    }

    pub fn num_free(&self) -> usize {
        self.links.iter().flatten().filter(|l| matches!(l, Link::Free(_))).count()
    }

    pub fn is_complete(&self) -> bool {
        self.num_free() == 0
    }

    pub fn free_slot(&self, k: usize) -> Option<SlotId> {
        for (fi, ls) in self.links.iter().enumerate() {
            for (si, l) in ls.iter().enumerate() {
                if *l == Link::Free(k) {
                    return Some(SlotId::new(fi, si));
                }
            }
        }
        None
    }

    /// Pairing edges, each listed once with the smaller slot first.
    pub fn edges(&self) -> Vec<(SlotId, SlotId)> {
        let mut out = vec![];
        for (fi, ls) in self.links.iter().enumerate() {
            for (si, l) in ls.iter().enumerate() {
                if let Link::Slot(t) = *l {
                    let s = SlotId::new(fi, si);
                    if s < t {
                        out.push((s, t));
                    }
                }
            }
        }
        out
    }

    /// Edges with both endpoints on one factor.
    pub fn internal_edges(&self) -> Vec<(SlotId, SlotId)> {
        self.edges().into_iter().filter(|(a, b)| a.factor == b.factor).collect()
    }

    pub fn sigma(&self) -> usize {
        self.factors.iter().filter(|f| f.kind != FactorKind::Metric).count()
    }

    pub fn weight(&self) -> i64 {
        self.factors.iter().map(Factor::weight).sum()
    }

    pub fn stats(&self) -> Stats {
        let internal = self.internal_edges();
        let mut delta = internal.len();
        let mut delta_bar = 0;
        let mut q = 0;
        for (fi, f) in self.factors.iter().enumerate() {
            match f.kind {
                FactorKind::Ricci => {
                    delta += 1;
                    q += 1;
                }
                FactorKind::ScalarCurv => {
                    delta += 2;
                    q += 1;
                    if f.m == 0 {
                        delta_bar += 1;
                    }
                }
                FactorKind::ScalarFn(_) if f.m == 2 && self.links[fi][0] == Link::Slot(SlotId::new(fi, 1)) => {
                    delta_bar += 1;
                }
                _ => {}
            }
        }
        Stats {
            sigma: self.sigma(),
            delta,
            delta_bar,
            q,
            weight: self.weight(),
        }
    }

    /// Label form: free index `k` gets label `k`, edges get labels after the
    /// free ones in slot order.
    pub fn to_indexed(&self) -> IndexedTerm {
        let nfree = self.num_free();
        let mut next = nfree as u32;
        let mut label: HashMap<SlotId, u32> = HashMap::new();
        let mut factors = vec![];
        for (fi, f) in self.factors.iter().enumerate() {
            let mut labs = vec![];
            for si in 0..f.slots() {
                let s = SlotId::new(fi, si);
                let l = match self.links[fi][si] {
                    Link::Free(k) => k as u32,
                    Link::Slot(t) => {
                        if let Some(&l) = label.get(&t) {
                            l
                        } else {
                            let l = next;
                            next += 1;
                            label.insert(s, l);
                            l
                        }
                    }
                };
                labs.push(l);
            }
            let intr = labs.split_off(f.m);
            factors.push(IFactor {
                kind: f.kind,
                derivs: labs,
                intr,
            });
        }
        IndexedTerm {
            factors,
            free: (0..nfree as u32).collect(),
        }
    }

    /// Build from labels, eliminating metric factors. Returns the number of
    /// metric self-traces (each worth a factor `n`).
    pub fn from_indexed(t: &IndexedTerm) -> Result<(u32, Contraction), ExprError> {
        let mut t = t.clone();
        let traces = t.eliminate_metrics();
        t.build().map(|c| (traces, c))
    }

    /// Number of index slots.
    pub fn total_slots(&self) -> usize {
        self.factors.iter().map(Factor::slots).sum()
    }

    /// Factor positions of the given kind.
    pub fn positions(&self, kind: FactorKind) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| self.factors[i].kind == kind).collect()
    }

    /// Divergence of a one-free-index contraction by the Leibniz rule; the new
    /// derivative is outermost.
    pub fn free_index_divergence(&self) -> Result<LinComb, ExprError> {
        let nf = self.num_free();
        if nf != 1 {
            return Err(ExprError::NotVectorField(nf));
        }
        let t = self.to_indexed();
        let mut out = LinComb::zero();
        for fi in 0..t.factors.len() {
            if t.factors[fi].kind == FactorKind::Metric {
                continue;
            }
            let mut u = t.clone();
            u.factors[fi].derivs.insert(0, 0);
            u.free.clear();
            out.push_indexed(DimRatio::one(), &u)?;
        }
        Ok(out)
    }
}

/// One factor in label form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IFactor {
    pub kind: FactorKind,
    pub derivs: Vec<u32>,
    pub intr: Vec<u32>,
}

impl IFactor {
    pub fn new(kind: FactorKind, derivs: Vec<u32>, intr: Vec<u32>) -> Self {
        IFactor { kind, derivs, intr }
    }

    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.derivs.iter().chain(&self.intr).copied()
    }
}

/// Label-based term: a label occurring twice is contracted, a label in
/// `free` occurs once.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexedTerm {
    pub factors: Vec<IFactor>,
    pub free: Vec<u32>,
}

impl IndexedTerm {
    pub fn new(factors: Vec<IFactor>, free: Vec<u32>) -> Self {
        IndexedTerm { factors, free }
    }

    /// A label not used anywhere in the term.
    pub fn fresh(&self) -> u32 {
        self.factors
            .iter()
            .flat_map(|f| f.labels())
            .chain(self.free.iter().copied())
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn rename(&mut self, from: u32, to: u32) {
        for f in &mut self.factors {
            for l in f.derivs.iter_mut().chain(f.intr.iter_mut()) {
                if *l == from {
                    *l = to;
                }
            }
        }
        for l in &mut self.free {
            if *l == from {
                *l = to;
            }
        }
    }

    fn count(&self, l: u32) -> usize {
        self.factors.iter().flat_map(|f| f.labels()).filter(|&x| x == l).count()
    }

    /// Contract metric factors into their neighbours; returns the number of
    /// self-traced metrics removed.
    pub fn eliminate_metrics(&mut self) -> u32 {
        let mut traces = 0;
        loop {
            let mut progress = false;
            for i in 0..self.factors.len() {
                if self.factors[i].kind != FactorKind::Metric || self.factors[i].intr.len() != 2 {
                    continue;
                }
                let (a, b) = (self.factors[i].intr[0], self.factors[i].intr[1]);
                if a == b {
                    self.factors.remove(i);
                    traces += 1;
                    progress = true;
                    break;
                }
                let elsewhere = |t: &IndexedTerm, l: u32| t.count(l) >= 2;
                if elsewhere(self, a) {
                    self.factors.remove(i);
                    self.rename(a, b);
                    progress = true;
                    break;
                }
                if elsewhere(self, b) {
                    self.factors.remove(i);
                    self.rename(b, a);
                    progress = true;
                    break;
                }
            }
            if !progress {
                return traces;
            }
        }
    }

    fn build(&self) -> Result<Contraction, ExprError> {
        let mut occ: BTreeMap<u32, Vec<SlotId>> = BTreeMap::new();
        let mut factors = vec![];
        let mut links = vec![];
        for (fi, f) in self.factors.iter().enumerate() {
            let want = f.kind.intrinsic();
            if f.intr.len() != want {
                return Err(ExprError::Arity {
                    kind: f.kind.name(),
                    expected: want,
                    got: f.intr.len(),
                });
            }
            factors.push(Factor::new(f.kind, f.derivs.len()));
            links.push(vec![Link::Free(usize::MAX); f.derivs.len() + want]);
            for (si, l) in f.labels().enumerate() {
                occ.entry(l).or_default().push(SlotId::new(fi, si));
            }
        }
        let free_pos: HashMap<u32, usize> = self.free.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        for &l in &self.free {
            match occ.get(&l).map(Vec::len) {
                Some(1) => {}
                Some(_) => return Err(ExprError::Overused(l.to_string())),
                None => return Err(ExprError::DanglingFree(l.to_string())),
            }
        }
        for (l, slots) in &occ {
            match slots.len() {
                1 => {
                    let k = *free_pos.get(l).ok_or_else(|| ExprError::Undeclared(l.to_string()))?;
                    links[slots[0].factor][slots[0].slot] = Link::Free(k);
                }
                2 => {
                    let (a, b) = (slots[0], slots[1]);
                    links[a.factor][a.slot] = Link::Slot(b);
                    links[b.factor][b.slot] = Link::Slot(a);
                }
                _ => return Err(ExprError::Overused(l.to_string())),
            }
        }
        Ok(Contraction { factors, links })
    }
}

/// Formal sum of contractions with coefficients rational in `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinComb {
    pub terms: Vec<(DimRatio, Contraction)>,
}

impl LinComb {
    pub fn zero() -> Self {
        LinComb { terms: vec![] }
    }

    pub fn single(coef: DimRatio, c: Contraction) -> Self {
        let mut out = LinComb::zero();
        out.push(coef, c);
        out
    }

    pub fn of(c: Contraction) -> Self {
        Self::single(DimRatio::one(), c)
    }

    pub fn push(&mut self, coef: DimRatio, c: Contraction) {
        if !coef.is_zero() {
            self.terms.push((coef, c));
        }
    }

    /// Push a label-form term, folding metric traces into the coefficient.
    pub fn push_indexed(&mut self, coef: DimRatio, t: &IndexedTerm) -> Result<(), ExprError> {
        let (traces, c) = Contraction::from_indexed(t)?;
        let coef = &coef * &DimRatio::n().pow(traces);
        self.push(coef, c);
        Ok(())
    }

    pub fn extend(&mut self, other: &LinComb) {
        self.terms.extend(other.terms.iter().cloned());
    }

    pub fn add_scaled(&mut self, k: &DimRatio, other: &LinComb) {
        for (c, t) in &other.terms {
            self.push(k * c, t.clone());
        }
    }

    /// Every term with its intrinsic traces resolved, collected.
    pub fn resolve_traces(&self) -> LinComb {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            let (f, d) = canonical::resolve_traces(c);
            out.push(k * &f, d);
        }
        out.collect()
    }

    pub fn scaled(&self, k: &DimRatio) -> LinComb {
        let mut out = LinComb::zero();
        out.add_scaled(k, self);
        out
    }

    pub fn neg(&self) -> LinComb {
        self.scaled(&DimRatio::from_int(-1))
    }

    pub fn sub(&self, other: &LinComb) -> LinComb {
        let mut out = self.clone();
        out.add_scaled(&DimRatio::from_int(-1), other);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Canonicalize every term and merge equal ones; output is sorted by
    /// canonical form.
    pub fn collect(&self) -> LinComb {
        let mut acc: BTreeMap<Contraction, DimRatio> = BTreeMap::new();
        for (coef, c) in &self.terms {
            let (sign, canon) = canonicalize(c);
            if sign == 0 {
                continue;
            }
            let k = if sign < 0 { -coef } else { coef.clone() };
            let e = acc.entry(canon).or_insert_with(DimRatio::zero);
            *e = &*e + &k;
        }
        LinComb {
            terms: acc.into_iter().filter(|(_, k)| !k.is_zero()).map(|(c, k)| (k, c)).collect(),
        }
    }

    /// Evaluate every coefficient at a concrete `n`.
    pub fn at_n(&self, n: i64) -> Result<LinComb, crate::ratcoef::CoefError> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.push(DimRatio::from_rational(k.eval_at(n)?), c.clone());
        }
        Ok(out)
    }

    pub fn min_sigma(&self) -> Option<usize> {
        self.terms.iter().map(|(_, c)| c.sigma()).min()
    }

    /// Terms whose length is exactly `sigma`.
    pub fn at_length(&self, sigma: usize) -> LinComb {
        LinComb {
            terms: self.terms.iter().filter(|(_, c)| c.sigma() == sigma).cloned().collect(),
        }
    }

    /// Terms satisfying a predicate on the canonical form.
    pub fn select<F: Fn(&Contraction) -> bool>(&self, pred: F) -> LinComb {
        let lc = self.collect();
        LinComb {
            terms: lc.terms.into_iter().filter(|(_, c)| pred(c)).collect(),
        }
    }
}

/// `a - b` collects to nothing.
pub fn equal_mod_symmetry(a: &LinComb, b: &LinComb) -> bool {
    a.sub(b).collect().is_empty()
}
