//! Explicit divergence constructions.
//!
//! The basic move erases a derivative slot of a complete contraction and
//! frees the slot it was paired with; the divergence of the resulting
//! vector field reproduces the contraction (exactly, when the erased slot
//! is the outermost derivative) plus the terms where the new derivative
//! hits one of the other factors.

mod quadratic;
mod silly;

use std::collections::HashMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{resolve_traces, Contraction, ExprError, FactorKind, LinComb, Link, SlotId};
use crate::ratcoef::DimRatio;
use crate::rewrite::{commute_derivatives, GradePolicy, RewriteError};
use crate::textio::{print, print_contraction};

pub use quadratic::{
    barred_cube, canonical_quadratic, classify_quadratic, crossed_cube, crossed_square, find_divergence, primed_cube, quadratic_shape,
    reduce_quadratic_weyl, weyl_gradient_norm, QuadShape, SearchOpts,
};
pub use silly::{
    sil_family, sil_sharp, silly_certificate, silly_decomposed_coefficient, silly_integrate_by_parts, silly_multiplicity,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DivError {
    #[error("slot {0:?} is not a derivative slot")]
    NotDerivative(SlotId),
    #[error("slot {0:?} is not paired with another slot")]
    Unpaired(SlotId),
    #[error("slots {0:?} and {1:?} are not an internal pair of one factor")]
    NotInternal(SlotId, SlotId),
    #[error("both slots of the internal pair are intrinsic; apply contracted_bianchi first")]
    BothIntrinsic,
    #[error("contraction has free indices")]
    NotComplete,
    #[error("stuck: internal contraction with no erasable derivative in {0}")]
    Stuck(String),
    #[error("no divergence found within the search bounds ({0} terms explored)")]
    NotFound(usize),
    #[error("not a handled quadratic shape: {0}")]
    Shape(String),
    #[error("factor psi{0} missing from a term")]
    MissingPsi(u32),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Coef(#[from] crate::ratcoef::CoefError),
}

/// One integration by parts: `coef * div(vector_field)` is subtracted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivStep {
    pub source: Contraction,
    pub coef: DimRatio,
    pub erased: SlotId,
    pub freed: SlotId,
    pub vector_field: Contraction,
}

/// `input - sum coef * div(V) - remainder = corrections`.
///
/// With `leading_only` the corrections are not enumerated and the identity
/// holds modulo contractions longer than the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivCertificate {
    pub input: LinComb,
    pub steps: Vec<DivStep>,
    pub remainder: LinComb,
    pub corrections: LinComb,
    pub truncated: usize,
    pub leading_only: bool,
    /// Dimension the coefficients were solved at, if any.
    pub dim: Option<i64>,
}

impl DivCertificate {
    fn new(input: LinComb) -> Self {
        DivCertificate {
            input,
            steps: vec![],
            remainder: LinComb::zero(),
            corrections: LinComb::zero(),
            truncated: 0,
            leading_only: false,
            dim: None,
        }
    }

    /// `sum coef * div(V)` as raw terms.
    pub fn divergence(&self) -> Result<LinComb, ExprError> {
        let mut out = LinComb::zero();
        for s in &self.steps {
            out.add_scaled(&s.coef, &s.vector_field.free_index_divergence()?);
        }
        Ok(out)
    }

    /// `input - div - remainder`, raw.
    pub fn defect(&self) -> Result<LinComb, ExprError> {
        Ok(self.input.sub(&self.divergence()?).sub(&self.remainder))
    }

    /// Symbolic check: the defect vanishes in the canonical (symmetric
    /// derivative block) model, or at leading length for leading-only
    /// certificates.
    pub fn holds(&self) -> Result<bool, ExprError> {
        let d = self.defect()?.resolve_traces();
        if self.leading_only {
            match self.dim {
                Some(n) => crate::expr::linearize::vanishes_at_leading_length_at(&d.collect(), n),
                None => crate::expr::linearize::vanishes_at_leading_length(&d.collect()),
            }
        } else {
            Ok(d.is_empty())
        }
    }

    pub fn to_json(&self) -> Value {
        let slot = |s: SlotId| json!([s.factor, s.slot]);
        json!({
            "input": print(&self.input),
            "steps": self.steps.iter().map(|s| json!({
                "coef": s.coef.to_string(),
                "source": print_contraction(&s.source),
                "erased": slot(s.erased),
                "freed": slot(s.freed),
                "vectorField": print_contraction(&s.vector_field),
            })).collect::<Vec<_>>(),
            "remainder": print(&self.remainder.collect()),
            "corrections": print(&self.corrections.collect()),
            "truncated": self.truncated,
            "leadingOnly": self.leading_only,
            "dim": self.dim,
        })
    }
}

/// Erase derivative slot `slot` and free its partner. Returns the vector
/// field, the freed slot and the divergence terms in which the new
/// derivative (outermost) hits a factor other than the erased one.
pub fn erase_slot(c: &Contraction, slot: SlotId) -> Result<(Contraction, SlotId, Vec<Contraction>), DivError> {
    if !c.is_complete() {
        return Err(DivError::NotComplete);
    }
    let f = c.factors().get(slot.factor).ok_or(DivError::NotDerivative(slot))?;
    if slot.slot >= f.m {
        return Err(DivError::NotDerivative(slot));
    }
    let Link::Slot(partner) = c.link(slot) else {
        return Err(DivError::Unpaired(slot));
    };
    let mut t = c.to_indexed();
    let lab = t.factors[slot.factor].derivs.remove(slot.slot);
    let mut others = vec![];
    for g in 0..t.factors.len() {
        if g == slot.factor || t.factors[g].kind == FactorKind::Metric {
            continue;
        }
        let mut u = t.clone();
        u.factors[g].derivs.insert(0, lab);
        others.push(Contraction::from_indexed(&u)?.1);
    }
    t.free = vec![lab];
    let v = Contraction::from_indexed(&t)?.1;
    Ok((v, partner, others))
}

/// The divergence step for an internal pair; the derivative endpoint (the
/// lower slot when both are derivatives) is erased.
pub fn erase_and_free(c: &Contraction, pair: (SlotId, SlotId)) -> Result<DivStep, DivError> {
    let (a, b) = pair;
    if a.factor != b.factor || c.link(a) != Link::Slot(b) {
        return Err(DivError::NotInternal(a, b));
    }
    let m = c.factors()[a.factor].m;
    let erased = match (a.slot < m, b.slot < m) {
        (false, false) => return Err(DivError::BothIntrinsic),
        (true, true) => {
            if a.slot < b.slot {
                a
            } else {
                b
            }
        }
        (true, false) => a,
        (false, true) => b,
    };
    let (v, freed, _) = erase_slot(c, erased)?;
    Ok(DivStep {
        source: c.clone(),
        coef: DimRatio::one(),
        erased,
        freed,
        vector_field: v,
    })
}

/// Internal pairs with a derivative endpoint, as (derivative slot, partner).
fn erasable(c: &Contraction) -> Vec<(SlotId, SlotId)> {
    let mut out = vec![];
    for (a, b) in c.internal_edges() {
        let m = c.factors()[a.factor].m;
        let (a, b) = if a.slot <= b.slot { (a, b) } else { (b, a) };
        if a.slot < m {
            out.push((a, b));
        }
    }
    out
}

/// Repeatedly integrate by parts the internal contractions involving a
/// derivative: deepest factor first, then lowest slot. Each step lowers the
/// number of internal contractions by one.
pub fn eliminate_internal_contractions(c: &Contraction, policy: &GradePolicy) -> Result<DivCertificate, DivError> {
    if !c.is_complete() {
        return Err(DivError::NotComplete);
    }
    let mut cert = DivCertificate::new(LinComb::of(c.clone()));
    let (k0, c0) = resolve_traces(c);
    let mut work = vec![(k0, c0)];
    while let Some((k, t)) = work.pop() {
        if k.is_zero() {
            continue;
        }
        let pairs = erasable(&t);
        let Some(&(er, _)) = pairs.iter().min_by_key(|(a, _)| (std::cmp::Reverse(t.factors()[a.factor].m), a.factor, a.slot)) else {
            if !t.internal_edges().is_empty() {
                return Err(DivError::Stuck(print_contraction(&t)));
            }
            cert.remainder.push(k, t);
            continue;
        };
        let mut cur = t;
        for p in (0..er.slot).rev() {
            let r = commute_derivatives(&cur, er.factor, p, p + 1, policy.mode)?;
            cert.corrections.add_scaled(&k, &r.corrections);
            cert.truncated += r.truncated;
            cur = r.main.terms[0].1.clone();
        }
        let top = SlotId::new(er.factor, 0);
        let (v, freed, others) = erase_slot(&cur, top)?;
        cert.steps.push(DivStep {
            source: cur,
            coef: k.clone(),
            erased: top,
            freed,
            vector_field: v,
        });
        for o in others {
            work.push((-&k, o));
        }
    }
    Ok(cert)
}

/// Terms whose canonical form satisfies `pred`.
pub fn select_sublinear<F: Fn(&Contraction) -> bool>(lc: &LinComb, pred: F) -> LinComb {
    lc.select(pred)
}

/// Cache of linearizations evaluated at a concrete dimension.
#[derive(Default)]
pub(crate) struct LinCache {
    n: i64,
    map: HashMap<Contraction, crate::expr::linearize::Sparse>,
}

impl LinCache {
    pub(crate) fn new(n: i64) -> Self {
        LinCache { n, map: HashMap::new() }
    }

    pub(crate) fn get(&mut self, c: &Contraction) -> Result<&crate::expr::linearize::Sparse, DivError> {
        if !self.map.contains_key(c) {
            let mut s = crate::expr::linearize::linearize_term(c);
            for v in s.values_mut() {
                *v = DimRatio::from_rational(v.eval_at(self.n)?);
            }
            s.retain(|_, v| !v.is_zero());
            self.map.insert(c.clone(), s);
        }
        Ok(&self.map[c])
    }
}

#[cfg(test)]
mod tests;
