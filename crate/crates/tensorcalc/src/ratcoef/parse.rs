//! Coefficient strings: rationals, rational functions of `n`, and products
//! containing `prod(start .. stop [by step])`.

use num::{BigInt, One};

use super::{Affine, CoefError, DimRatio, ProdFactor, ProdRatio, RangeProduct, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoefValue {
    Ratio(DimRatio),
    Prod(ProdRatio),
}

impl CoefValue {
    pub fn into_ratio(self) -> Result<DimRatio, CoefError> {
        match self {
            CoefValue::Ratio(r) => Ok(r),
            CoefValue::Prod(p) => prod_to_ratio(&p).ok_or_else(|| CoefError::Syntax {
                pos: 0,
                msg: "range products need a concrete n".into(),
            }),
        }
    }

    pub fn eval_at(&self, n: i64) -> Result<Rational, CoefError> {
        match self {
            CoefValue::Ratio(r) => r.eval_at(n),
            CoefValue::Prod(p) => p.eval_at(n),
        }
    }

    fn as_prod(&self) -> ProdRatio {
        match self {
            CoefValue::Ratio(r) => ProdRatio::from_ratio(r),
            CoefValue::Prod(p) => p.clone(),
        }
    }
}

fn prod_to_ratio(p: &ProdRatio) -> Option<DimRatio> {
    let mut acc = DimRatio::from_rational(p.coef.clone());
    for f in &p.num {
        match f {
            ProdFactor::Poly(q) => acc = &acc * &DimRatio::from_poly(q.clone()),
            ProdFactor::Range(_) => return None,
        }
    }
    for f in &p.den {
        match f {
            ProdFactor::Poly(q) => acc = acc.checked_div(&DimRatio::from_poly(q.clone())).ok()?,
            ProdFactor::Range(_) => return None,
        }
    }
    Some(acc)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    N,
    Prod,
    By,
    DotDot,
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, CoefError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = vec![];
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let j = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((j, Tok::Int(s[j..i].parse().unwrap())));
        } else if c.is_ascii_alphabetic() {
            let j = i;
            while i < b.len() && b[i].is_ascii_alphabetic() {
                i += 1;
            }
            let t = match &s[j..i] {
                "n" => Tok::N,
                "prod" => Tok::Prod,
                "by" => Tok::By,
                w => {
                    return Err(CoefError::Syntax {
                        pos: j,
                        msg: format!("unknown word {w:?}"),
                    })
                }
            };
            out.push((j, t));
        } else if c == '.' && b.get(i + 1) == Some(&b'.') {
            out.push((i, Tok::DotDot));
            i += 2;
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(CoefError::Syntax {
                pos: i,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    n: Option<i64>,
}

type PResult = Result<CoefValue, CoefError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CoefError> {
        Err(CoefError::Syntax {
            pos: self.at(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), CoefError> {
        if self.eat(&Tok::Op(c)) {
            Ok(())
        } else {
            self.err(format!("expected {c:?}"))
        }
    }

    fn expr(&mut self) -> PResult {
        let mut v = self.term()?;
        loop {
            if self.eat(&Tok::Op('+')) {
                let r = self.term()?;
                v = self.add(v, r, false)?;
            } else if self.eat(&Tok::Op('-')) {
                let r = self.term()?;
                v = self.add(v, r, true)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn add(&self, a: CoefValue, b: CoefValue, sub: bool) -> PResult {
        match (a, b) {
            (CoefValue::Ratio(x), CoefValue::Ratio(y)) => {
                Ok(CoefValue::Ratio(if sub { &x - &y } else { &x + &y }))
            }
            _ => self.err("sums involving range products need a concrete n"),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Int(_)) | Some(Tok::N) | Some(Tok::Prod) | Some(Tok::Op('('))
        )
    }

    fn term(&mut self) -> PResult {
        let mut v = self.unary()?;
        loop {
            if self.eat(&Tok::Op('*')) {
                let r = self.unary()?;
                v = mul(v, r);
            } else if self.eat(&Tok::Op('/')) {
                let r = self.unary()?;
                v = self.div(v, r)?;
            } else if self.starts_atom() {
                let r = self.power()?;
                v = mul(v, r);
            } else {
                return Ok(v);
            }
        }
    }

    fn div(&self, a: CoefValue, b: CoefValue) -> PResult {
        match (&a, &b) {
            (CoefValue::Ratio(x), CoefValue::Ratio(y)) => Ok(CoefValue::Ratio(x.checked_div(y)?)),
            _ => Ok(simplify(CoefValue::Prod(a.as_prod().mul(&b.as_prod().recip()?)))),
        }
    }

    fn unary(&mut self) -> PResult {
        if self.eat(&Tok::Op('-')) {
            let v = self.unary()?;
            return Ok(mul(CoefValue::Ratio(DimRatio::from_int(-1)), v));
        }
        if self.eat(&Tok::Op('+')) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> PResult {
        let base = self.atom()?;
        if self.eat(&Tok::Op('^')) {
            let e = match self.peek() {
                Some(Tok::Int(e)) => e.clone(),
                _ => return self.err("expected an exponent"),
            };
            self.pos += 1;
            let e: u32 = e.try_into().map_err(|_| CoefError::Syntax {
                pos: self.at(),
                msg: "exponent too large".into(),
            })?;
            let mut acc = CoefValue::Ratio(DimRatio::one());
            for _ in 0..e {
                acc = mul(acc, base.clone());
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(CoefValue::Ratio(DimRatio::from_rational(Rational::from_integer(v))))
            }
            Some(Tok::N) => {
                self.pos += 1;
                Ok(CoefValue::Ratio(match self.n {
                    Some(n) => DimRatio::from_int(n),
                    None => DimRatio::n(),
                }))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(Tok::Prod) => {
                self.pos += 1;
                self.expect('(')?;
                let start = self.affine()?;
                if !self.eat(&Tok::DotDot) {
                    return self.err("expected '..'");
                }
                let stop = self.affine()?;
                let step = if self.eat(&Tok::By) {
                    match self.peek().cloned() {
                        Some(Tok::Int(s)) => {
                            self.pos += 1;
                            i64::try_from(s).map_err(|_| CoefError::Syntax {
                                pos: self.at(),
                                msg: "step too large".into(),
                            })?
                        }
                        _ => return self.err("expected a step"),
                    }
                } else {
                    1
                };
                self.expect(')')?;
                let r = RangeProduct::new(start, stop, step)?;
                match self.n {
                    Some(n) => Ok(CoefValue::Ratio(DimRatio::from_rational(r.eval_at(n)?))),
                    None => Ok(CoefValue::Prod(ProdRatio {
                        coef: Rational::one(),
                        num: vec![ProdFactor::Range(r)],
                        den: vec![],
                    })),
                }
            }
            _ => self.err("expected a number, n, prod or '('"),
        }
    }

    /// Range bounds are parsed with `n` kept symbolic.
    fn affine(&mut self) -> Result<Affine, CoefError> {
        let saved = self.n.take();
        let v = self.expr();
        self.n = saved;
        let bad = || CoefError::Syntax {
            pos: 0,
            msg: "range bounds must be integer affine in n".into(),
        };
        let r = v?.into_ratio()?;
        if !r.den().is_constant() || r.num().degree().unwrap_or(0) > 1 {
            return Err(bad());
        }
        let d = r.den().leading();
        let a = r.num().coeff(1) / &d;
        let b = r.num().coeff(0) / &d;
        if !a.is_integer() || !b.is_integer() {
            return Err(bad());
        }
        let a = i64::try_from(a.to_integer()).map_err(|_| bad())?;
        let b = i64::try_from(b.to_integer()).map_err(|_| bad())?;
        Ok(Affine::new(a, b))
    }
}

fn mul(a: CoefValue, b: CoefValue) -> CoefValue {
    match (&a, &b) {
        (CoefValue::Ratio(x), CoefValue::Ratio(y)) => CoefValue::Ratio(x * y),
        _ => simplify(CoefValue::Prod(a.as_prod().mul(&b.as_prod()))),
    }
}

/// Collapse a product back to a ratio when no range factor remains, and
/// fold polynomial factors of a product into one numerator and one
/// denominator.
fn simplify(v: CoefValue) -> CoefValue {
    let CoefValue::Prod(p) = v else { return v };
    if let Some(r) = prod_to_ratio(&p) {
        return CoefValue::Ratio(r);
    }
    let mut poly = DimRatio::from_rational(p.coef.clone());
    let mut num = vec![];
    let mut den = vec![];
    for f in &p.num {
        match f {
            ProdFactor::Poly(q) => poly = &poly * &DimRatio::from_poly(q.clone()),
            r => num.push(r.clone()),
        }
    }
    for f in &p.den {
        match f {
            ProdFactor::Poly(q) => {
                poly = poly.checked_div(&DimRatio::from_poly(q.clone())).unwrap_or_default()
            }
            r => den.push(r.clone()),
        }
    }
    if poly.is_zero() {
        return CoefValue::Ratio(DimRatio::zero());
    }
    let base = ProdRatio::from_ratio(&poly);
    let mut out = base;
    // polynomial factors first, then ranges, matching the printer
    out.num.extend(num);
    out.den.extend(den);
    CoefValue::Prod(out)
}

/// Parse a coefficient. With `n` given every symbol is evaluated, so the
/// result is a constant ratio.
pub fn parse_coef(s: &str, n: Option<i64>) -> Result<CoefValue, CoefError> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(CoefError::Syntax {
            pos: 0,
            msg: "empty coefficient".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: s.len(),
        n,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(match v {
        CoefValue::Ratio(r) if r.is_zero() => CoefValue::Ratio(DimRatio::zero()),
        v => v,
    })
}

impl std::str::FromStr for DimRatio {
    type Err = CoefError;
    fn from_str(s: &str) -> Result<Self, CoefError> {
        parse_coef(s, None)?.into_ratio()
    }
}

impl std::fmt::Display for CoefValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoefValue::Ratio(r) => write!(f, "{r}"),
            CoefValue::Prod(p) => write!(f, "{p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::rat;
    use super::*;

    fn ratio(s: &str) -> DimRatio {
        s.parse().unwrap()
    }

    #[test]
    fn ratios_round_trip() {
        for s in ["(n-3)/(2n-8)", "1/(3-n)", "1/2", "-3", "n", "(n-3)/2", "1/n", "0"] {
            assert_eq!(ratio(s).to_string(), s);
        }
    }

    #[test]
    fn implicit_multiplication() {
        assert_eq!(ratio("2n - 8"), ratio("2*(n-4)"));
        assert_eq!(ratio("(n-3)(n-4)"), ratio("n^2 - 7n + 12"));
    }

    #[test]
    fn products() {
        let v = parse_coef("4 / prod(n-3 .. 4)", None).unwrap();
        assert_eq!(v.to_string(), "4 / prod(n-3 .. 4)");
        assert_eq!(v.eval_at(10).unwrap(), rat(1, 210));
        let w = parse_coef("4 / ((n-3) * prod(n-4 .. 4 by 2))", None).unwrap();
        assert_eq!(w.eval_at(10).unwrap(), rat(1, 42));
        assert_eq!(w.to_string(), "4 / ((n-3) * prod(n-4 .. 4 by 2))");
    }

    #[test]
    fn concrete_n() {
        let v = parse_coef("4 / prod(n-3 .. 4) + 1/(n-3)", Some(10)).unwrap();
        assert_eq!(v.into_ratio().unwrap().as_constant().unwrap(), rat(1, 210) + rat(1, 7));
        assert_eq!(parse_coef("n/2 - 2", Some(10)).unwrap().into_ratio().unwrap(), DimRatio::from_int(3));
    }

    #[test]
    fn errors() {
        assert!(parse_coef("1/0", None).is_err());
        assert!(parse_coef("(n-3", None).is_err());
        assert!(parse_coef("prod(n-3 .. 4) + 1", None).is_err());
        assert!(parse_coef("x", None).is_err());
    }
}
