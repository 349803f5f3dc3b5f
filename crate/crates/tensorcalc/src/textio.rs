//! Text form of linear combinations.
//!
//! ```text
//! lincomb := ["+"|"-"] term {("+"|"-") term}
//! term    := [coef ["*"]] "contr" "(" {factor ["*"]} ")"
//! factor  := {"D[" idx {"," idx} "]" | "D^[" count "][" base "]"} kind ["[" [idx {"," idx}] "]"]
//! kind    := "R" | "Ric" | "Rm" | "W" | "P" | "psi" nat | "Omega" | "g"
//! ```
//!
//! A letter occurring twice in a term is contracted, once is free. `D^[k][r]`
//! stands for the derivative indices `r#1 .. r#k`, where `k` may mention `n`.
//! A file holds newline-separated statements; `n = 10` fixes the dimension
//! for what follows, `#` starts a comment, and a line beginning with `+` or
//! `-` continues the previous statement.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::expr::{Contraction, ExprError, FactorKind, IFactor, IndexedTerm, LinComb, Link, SlotId};
use crate::ratcoef::{parse_coef, CoefError, DimRatio};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{msg} at {start}..{end}")]
pub struct ParseError {
    pub start: usize,
    pub end: usize,
    pub msg: String,
}

impl ParseError {
    fn new(start: usize, end: usize, msg: impl Into<String>) -> Self {
        ParseError {
            start,
            end,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    SetN(i64),
    Expr { lc: LinComb, n: Option<i64>, start: usize, end: usize },
}

/// Parse a single linear combination.
pub fn parse(text: &str) -> Result<LinComb, ParseError> {
    parse_with_n(text, None)
}

/// Parse with `n` available to derivative-count sugar.
pub fn parse_with_n(text: &str, n: Option<i64>) -> Result<LinComb, ParseError> {
    let mut stmts = parse_file(text, n)?;
    let exprs: Vec<_> = stmts
        .drain(..)
        .filter_map(|s| match s {
            Statement::Expr { lc, .. } => Some(lc),
            Statement::SetN(_) => None,
        })
        .collect();
    match exprs.len() {
        1 => Ok(exprs.into_iter().next().unwrap()),
        k => Err(ParseError::new(0, text.len(), format!("expected one expression, found {k}"))),
    }
}

fn blank_comments_and_join(src: &str) -> String {
    let mut out: Vec<u8> = src.as_bytes().to_vec();
    let mut i = 0;
    while i < out.len() {
        if out[i] == b'#' && (i == 0 || out[i - 1].is_ascii_whitespace()) {
            while i < out.len() && out[i] != b'\n' {
                out[i] = b' ';
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    // join continuation lines
    let mut last_sig: Option<u8> = None;
    for i in 0..out.len() {
        if out[i] == b'\n' {
            let next = out[i + 1..].iter().find(|c| !c.is_ascii_whitespace()).copied();
            let cont_next = matches!(next, Some(b'+') | Some(b'-') | Some(b')') | Some(b'*'));
            let cont_prev = matches!(last_sig, Some(b'+') | Some(b'-') | Some(b'*') | Some(b'(') | Some(b','));
            if cont_next || cont_prev {
                out[i] = b' ';
            }
        } else if !out[i].is_ascii_whitespace() {
            last_sig = Some(out[i]);
        }
    }
    String::from_utf8(out).expect("ascii edits keep utf-8")
}

/// Parse a whole `.tc` source.
pub fn parse_file(src: &str, n: Option<i64>) -> Result<Vec<Statement>, ParseError> {
    let buf = blank_comments_and_join(src);
    let mut out = vec![];
    let mut n = n;
    let mut off = 0;
    for line in buf.split('\n') {
        let start = off;
        off += line.len() + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let lead = line.len() - line.trim_start().len();
        if let Some(rest) = t.strip_prefix("n").map(str::trim_start) {
            if let Some(v) = rest.strip_prefix('=') {
                let v = v.trim();
                let k: i64 = v
                    .parse()
                    .map_err(|_| ParseError::new(start, start + line.len(), "expected an integer dimension"))?;
                n = Some(k);
                out.push(Statement::SetN(k));
                continue;
            }
        }
        let mut p = P {
            s: line,
            pos: 0,
            base: start,
            n,
        };
        p.pos = lead;
        let lc = p.lincomb()?;
        out.push(Statement::Expr {
            lc,
            n,
            start: start + lead,
            end: start + line.trim_end().len(),
        });
    }
    Ok(out)
}

struct P<'a> {
    s: &'a str,
    pos: usize,
    base: usize,
    n: Option<i64>,
}

struct RawFactor {
    kind: FactorKind,
    derivs: Vec<String>,
    intr: Vec<String>,
    start: usize,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'#' || c == b'_'
}

impl P<'_> {
    fn err<T>(&self, start: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.base + start, self.base + self.pos.max(start + 1), msg))
    }

    fn bytes(&self) -> &[u8] {
        self.s.as_bytes()
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes().get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(self.pos, format!("expected '{}'", c as char))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.ws();
        let st = self.pos;
        if !self.peek().is_some_and(is_ident_start) {
            return self.err(st, "expected a name");
        }
        while self.peek().is_some_and(is_ident) {
            self.pos += 1;
        }
        Ok(self.s[st..self.pos].to_string())
    }

    /// Position of the next `contr` keyword at bracket depth zero.
    fn find_contr(&self) -> Option<usize> {
        let b = self.bytes();
        let mut depth = 0i32;
        let mut i = self.pos;
        while i < b.len() {
            match b[i] {
                b'(' | b'[' => depth += 1,
                b')' | b']' => depth -= 1,
                _ => {}
            }
            if depth == 0
                && self.s[i..].starts_with("contr")
                && (i == 0 || !is_ident(b[i - 1]))
                && !b.get(i + 5).copied().is_some_and(is_ident)
            {
                return Some(i);
            }
            i += 1;
        }
        None
    }

    fn lincomb(&mut self) -> Result<LinComb, ParseError> {
        let mut lc = LinComb::zero();
        let mut free_names: Option<(BTreeSet<String>, usize)> = None;
        let mut first = true;
        loop {
            self.ws();
            if self.pos >= self.s.len() {
                break;
            }
            let st = self.pos;
            let mut sign = 1;
            if self.eat(b'+') {
            } else if self.eat(b'-') {
                sign = -1;
            } else if !first {
                return self.err(st, "expected '+' or '-' between terms");
            }
            first = false;
            let (k, c, names) = self.term()?;
            let k = if sign < 0 { -k } else { k };
            match &free_names {
                None => free_names = Some((names, st)),
                Some((f, _)) if *f != names => {
                    return self.err(st, "terms carry different free indices");
                }
                _ => {}
            }
            lc.push(k, c);
        }
        if first {
            return self.err(self.pos, "empty expression");
        }
        Ok(lc)
    }

    fn term(&mut self) -> Result<(DimRatio, Contraction, BTreeSet<String>), ParseError> {
        self.ws();
        let st = self.pos;
        let Some(at) = self.find_contr() else {
            return self.err(st, "expected contr( ... )");
        };
        let mut coef_txt = self.s[st..at].trim_end();
        if let Some(c) = coef_txt.strip_suffix('*') {
            coef_txt = c.trim_end();
        }
        let coef = if coef_txt.is_empty() {
            DimRatio::one()
        } else {
            self.coefficient(coef_txt, st)?
        };
        self.pos = at + 5;
        self.expect(b'(')?;
        let mut raw = vec![];
        loop {
            self.ws();
            if self.eat(b')') {
                break;
            }
            if self.peek().is_none() {
                return self.err(self.pos, "unclosed contr(");
            }
            raw.push(self.factor()?);
            self.eat(b'*');
        }
        let (it, names) = self.index_term(&raw)?;
        let (traces, c) = Contraction::from_indexed(&it).map_err(|e| self.expr_err(st, e))?;
        Ok((&coef * &DimRatio::n().pow(traces), c, names))
    }

    fn coefficient(&self, txt: &str, st: usize) -> Result<DimRatio, ParseError> {
        let conv = |e: CoefError| ParseError::new(self.base + st, self.base + st + txt.len(), e.to_string());
        match parse_coef(txt, None) {
            Ok(v) => match v.into_ratio() {
                Ok(r) => Ok(r),
                Err(_) => parse_coef(txt, self.n).and_then(|v| v.into_ratio()).map_err(conv),
            },
            Err(e) => Err(conv(e)),
        }
    }

    fn expr_err(&self, st: usize, e: ExprError) -> ParseError {
        ParseError::new(self.base + st, self.base + self.pos, e.to_string())
    }

    fn index_list(&mut self, close: u8) -> Result<Vec<String>, ParseError> {
        let mut out = vec![];
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(b',')?;
        }
    }

    fn factor(&mut self) -> Result<RawFactor, ParseError> {
        self.ws();
        let st = self.pos;
        let mut derivs = vec![];
        loop {
            self.ws();
            let rest = &self.s[self.pos..];
            if rest.starts_with("D[") {
                self.pos += 2;
                derivs.extend(self.index_list(b']')?);
            } else if rest.starts_with("D^[") {
                self.pos += 3;
                let cst = self.pos;
                let close = self.s[cst..]
                    .find(']')
                    .map(|i| cst + i)
                    .ok_or_else(|| ParseError::new(self.base + cst, self.base + self.s.len(), "unclosed D^["))?;
                let txt = &self.s[cst..close];
                let Some(n) = self.n else {
                    return self.err(cst, "derivative count needs a declared n");
                };
                let v = parse_coef(txt, Some(n))
                    .and_then(|v| v.into_ratio())
                    .map_err(|e| ParseError::new(self.base + cst, self.base + close, e.to_string()))?;
                let k = v
                    .as_constant()
                    .filter(|c| c.is_integer() && *c >= num::zero())
                    .ok_or_else(|| {
                        ParseError::new(self.base + cst, self.base + close, "derivative count must be a natural number")
                    })?
                    .to_integer();
                self.pos = close + 1;
                self.expect(b'[')?;
                let base = self.ident()?;
                self.expect(b']')?;
                let k: usize = k.try_into().unwrap_or(0);
                derivs.extend((1..=k).map(|i| format!("{base}#{i}")));
            } else {
                break;
            }
        }
        let kst = self.pos;
        let name = self.ident()?;
        let Some(kind) = FactorKind::from_name(&name) else {
            return self.err(kst, format!("unknown factor {name:?}"));
        };
        let intr = if self.eat(b'[') { self.index_list(b']')? } else { vec![] };
        if intr.len() != kind.intrinsic() {
            return self.err(
                kst,
                format!("{name} takes {} indices, got {}", kind.intrinsic(), intr.len()),
            );
        }
        Ok(RawFactor {
            kind,
            derivs,
            intr,
            start: st,
        })
    }

    fn index_term(&self, raw: &[RawFactor]) -> Result<(IndexedTerm, BTreeSet<String>), ParseError> {
        let mut count: BTreeMap<&str, usize> = BTreeMap::new();
        for f in raw {
            for i in f.derivs.iter().chain(&f.intr) {
                *count.entry(i.as_str()).or_default() += 1;
            }
        }
        for f in raw {
            for i in f.derivs.iter().chain(&f.intr) {
                if count[i.as_str()] > 2 {
                    return self.err(f.start, format!("index {i} appears {} times", count[i.as_str()]));
                }
            }
        }
        let mut free: Vec<&str> = count.iter().filter(|(_, &c)| c == 1).map(|(k, _)| *k).collect();
        free.sort_by(|a, b| (a.len(), *a).cmp(&(b.len(), *b)));
        let mut label: BTreeMap<&str, u32> = BTreeMap::new();
        for (i, f) in free.iter().enumerate() {
            label.insert(f, i as u32);
        }
        let mut next = free.len() as u32;
        for k in count.keys() {
            label.entry(k).or_insert_with(|| {
                next += 1;
                next - 1
            });
        }
        let factors = raw
            .iter()
            .map(|f| {
                IFactor::new(
                    f.kind,
                    f.derivs.iter().map(|i| label[i.as_str()]).collect(),
                    f.intr.iter().map(|i| label[i.as_str()]).collect(),
                )
            })
            .collect();
        Ok((
            IndexedTerm::new(factors, (0..free.len() as u32).collect()),
            free.into_iter().map(String::from).collect(),
        ))
    }
}

fn paired_name(mut i: usize) -> String {
    let mut s = vec![];
    loop {
        s.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

fn free_name(i: usize) -> String {
    paired_name(i).to_ascii_uppercase()
}

/// Text of a single contraction (no canonicalization).
pub fn print_contraction(c: &Contraction) -> String {
    let mut names: BTreeMap<SlotId, String> = BTreeMap::new();
    let mut next = 0;
    let mut parts = vec![];
    for (fi, f) in c.factors().iter().enumerate() {
        let mut idx = vec![];
        for si in 0..f.slots() {
            let s = SlotId::new(fi, si);
            let name = match c.link(s) {
                Link::Free(k) => free_name(k),
                Link::Slot(t) => {
                    if let Some(nm) = names.get(&t) {
                        nm.clone()
                    } else {
                        let nm = paired_name(next);
                        next += 1;
                        names.insert(s, nm.clone());
                        nm
                    }
                }
            };
            idx.push(name);
        }
        let intr = idx.split_off(f.m);
        let mut p = String::new();
        if !idx.is_empty() {
            p.push_str(&format!("D[{}] ", idx.join(",")));
        }
        p.push_str(&f.kind.name());
        if !intr.is_empty() {
            p.push_str(&format!("[{}]", intr.join(",")));
        }
        parts.push(p);
    }
    format!("contr({})", parts.join(" "))
}

fn coef_prefix(k: &DimRatio) -> (bool, String) {
    let s = k.to_string();
    let (neg, abs) = match s.strip_prefix('-') {
        Some(_) => (true, (-k).to_string()),
        None => (false, s),
    };
    (neg, if abs == "1" { String::new() } else { format!("{abs} * ") })
}

/// Canonical text: terms are canonicalized, merged and printed in canonical
/// order.
pub fn print(lc: &LinComb) -> String {
    print_collected(&lc.collect())
}

/// Print terms in the given order without canonicalizing.
pub fn print_collected(lc: &LinComb) -> String {
    if lc.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (k, c)) in lc.terms.iter().enumerate() {
        let (neg, pre) = coef_prefix(k);
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&pre);
        out.push_str(&print_contraction(c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Stats;

    #[test]
    fn ricci_divergence_shape() {
        let lc = parse("contr( D[a] Ric[a,i] * D[b] Ric[b,i] )").unwrap();
        let c = &lc.terms[0].1;
        assert_eq!(c.sigma(), 2);
        assert_eq!(c.stats().delta, 2 + 2);
        assert!(c.is_complete());
    }

    #[test]
    fn scalar_curvature() {
        let lc = parse("contr( R )").unwrap();
        let st = lc.terms[0].1.stats();
        assert_eq!(
            st,
            Stats {
                sigma: 1,
                delta: 2,
                delta_bar: 1,
                q: 1,
                weight: -2
            }
        );
        assert_eq!(parse("contr(R[])").unwrap(), lc);
    }

    #[test]
    fn weyl_norm() {
        let lc = parse("contr( W[i,j,k,l] W[i,j,k,l] )").unwrap();
        let c = &lc.terms[0].1;
        assert_eq!(c.internal_edges().len(), 0);
        assert_eq!(c.edges().len(), 4);
    }

    #[test]
    fn empty_prints_zero() {
        assert_eq!(print(&LinComb::zero()), "0");
        assert_eq!(print(&parse("contr(R) - contr(R)").unwrap()), "0");
    }

    #[test]
    fn inverse_three_minus_n() {
        let lc = parse("1/(3-n) * contr(R)").unwrap();
        let s = print(&lc);
        assert_eq!(s, "1/(3-n) * contr(R)");
        assert_eq!(parse(&s).unwrap().collect(), lc.collect());
        let neg = parse("- 1/(n-3) contr(R)").unwrap();
        assert_eq!(print(&neg), s);
    }

    #[test]
    fn errors() {
        let e = parse("contr( Ric[a,a,a] )").unwrap_err();
        assert!(e.msg.contains("takes 2"));
        let e = parse("contr( D[a] Ric[a,b] Ric[a,b] )").unwrap_err();
        assert!(e.msg.contains("appears 3 times"), "{}", e.msg);
        let e = parse("contr( Ric[a,b] ").unwrap_err();
        assert!(e.msg.contains("unclosed") || e.msg.contains("expected"), "{}", e.msg);
        assert!(parse("contr( Foo[a] )").is_err());
        assert!(parse("contr(Ric[a,b]) + contr(R)").is_err());
    }

    #[test]
    fn sugar_and_statements() {
        let src = "# comment\nn = 10\ncontr( D^[n/2-2][r] W[i,j,k,l] D^[n/2-2][r] W[i,j,k,l] )\n";
        let st = parse_file(src, None).unwrap();
        assert_eq!(st[0], Statement::SetN(10));
        let Statement::Expr { lc, .. } = &st[1] else { panic!() };
        let s = lc.terms[0].1.stats();
        assert_eq!((s.sigma, s.delta, s.weight), (2, 0, -10));
    }

    #[test]
    fn continuation_lines() {
        let src = "contr(R)\n  - contr(R)\n";
        let st = parse_file(src, None).unwrap();
        assert_eq!(st.len(), 1);
    }

    #[test]
    fn free_indices_order() {
        let lc = parse("contr( D[i] R D[j] R )").unwrap();
        let c = &lc.terms[0].1;
        assert_eq!(c.num_free(), 2);
        assert_eq!(print(&lc), "contr(D[A] R D[B] R)");
    }
}
