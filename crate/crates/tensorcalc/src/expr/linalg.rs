//! Sparse Gaussian elimination over [`DimRatio`].

use std::collections::{BTreeMap, HashMap};

use super::linearize::{linearize_term, Sparse};
use super::{Contraction, LinComb};
use crate::ratcoef::DimRatio;

pub type Row = BTreeMap<usize, DimRatio>;

/// Incremental echelon basis of sparse vectors, remembering how each basis
/// row combines the inserted vectors.
#[derive(Default)]
pub struct Echelon {
    rows: Vec<(usize, Row, Row)>,
    pivots: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reduce `v` (tagged as input `id`) against the basis. Returns `None`
    /// when `v` became a new basis row, or the combination of earlier inputs
    /// equal to `v` otherwise.
    pub fn insert(&mut self, id: usize, mut v: Row) -> Option<Row> {
        let mut combo: Row = BTreeMap::new();
        combo.insert(id, DimRatio::one());
        loop {
            let hit = v.keys().rev().find(|k| self.pivots.contains_key(k)).copied();
            let Some(k) = hit else { break };
            let ri = self.pivots[&k];
            let f = v[&k].clone();
            let (_, row, rc) = &self.rows[ri];
            axpy(&mut v, &-&f, row);
            axpy(&mut combo, &-&f, rc);
        }
        if v.is_empty() {
            combo.remove(&id);
            let neg = combo.into_iter().map(|(k, c)| (k, -c)).collect();
            return Some(neg);
        }
        let (&p, lead) = v.iter().next_back().unwrap();
        let inv = DimRatio::one().checked_div(lead).unwrap();
        scale(&mut v, &inv);
        scale(&mut combo, &inv);
        self.pivots.insert(p, self.rows.len());
        self.rows.push((p, v, combo));
        None
    }
}

fn axpy(acc: &mut Row, k: &DimRatio, v: &Row) {
    for (i, c) in v {
        let e = acc.entry(*i).or_insert_with(DimRatio::zero);
        *e = &*e + &(k * c);
        if e.is_zero() {
            acc.remove(i);
        }
    }
}

fn scale(v: &mut Row, k: &DimRatio) {
    for c in v.values_mut() {
        *c = &*c * k;
    }
}

/// Index linearized keys so they can be echelon columns.
#[derive(Default)]
pub struct KeyIndex {
    ids: HashMap<Contraction, usize>,
}

impl KeyIndex {
    pub fn row(&mut self, s: &Sparse) -> Row {
        let mut out = Row::new();
        for (k, v) in s {
            let n = self.ids.len();
            let id = *self.ids.entry(k.clone()).or_insert(n);
            out.insert(id, v.clone());
        }
        out
    }
}

/// Rewrite a collected combination of equal-length contractions over a
/// subset of its own terms that is independent at leading length. Terms
/// whose linearization depends on earlier terms are replaced by that
/// dependency, so an identity that holds modulo longer contractions
/// reduces to the empty combination.
pub fn reduce_leading(lc: &LinComb) -> LinComb {
    let lc = lc.collect();
    let mut keys = KeyIndex::default();
    let mut ech = Echelon::new();
    let mut coef: Vec<DimRatio> = lc.terms.iter().map(|(k, _)| k.clone()).collect();
    let mut dep: Vec<Option<Row>> = vec![None; lc.len()];
    for (i, (_, c)) in lc.terms.iter().enumerate() {
        let row = keys.row(&linearize_term(c));
        dep[i] = ech.insert(i, row);
    }
    for i in (0..lc.len()).rev() {
        if let Some(d) = &dep[i] {
            let k = std::mem::take(&mut coef[i]);
            for (j, c) in d {
                coef[*j] = &coef[*j] + &(&k * c);
            }
        }
    }
    let mut out = LinComb::zero();
    for (i, (_, c)) in lc.terms.iter().enumerate() {
        out.push(coef[i].clone(), c.clone());
    }
    out
}

/// Coefficients `x` with `sum x_i basis_i = target` modulo longer
/// contractions, or `None` when no such combination exists.
pub fn solve_leading(target: &LinComb, basis: &[Contraction]) -> Option<Vec<DimRatio>> {
    let mut keys = KeyIndex::default();
    let mut ech = Echelon::new();
    for (i, c) in basis.iter().enumerate() {
        ech.insert(i, keys.row(&linearize_term(c)));
    }
    let t = keys.row(&super::linearize::linearize(target));
    if t.is_empty() {
        return Some(vec![DimRatio::zero(); basis.len()]);
    }
    let combo = ech.insert(basis.len(), t)?;
    let mut out = vec![DimRatio::zero(); basis.len()];
    for (i, c) in combo {
        out[i] = c;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[(usize, i64)]) -> Row {
        v.iter().map(|&(i, c)| (i, DimRatio::from_int(c))).collect()
    }

    #[test]
    fn detects_dependency() {
        let mut e = Echelon::new();
        assert!(e.insert(0, row(&[(0, 1), (1, 1)])).is_none());
        assert!(e.insert(1, row(&[(1, 1)])).is_none());
        let d = e.insert(2, row(&[(0, 2)])).unwrap();
        // v2 = 2 v0 - 2 v1
        assert_eq!(d, row(&[(0, 2), (1, -2)]));
    }
}
