use std::fmt;

use num::{One, Signed, Zero};

use super::{int, CoefError, DimPoly, DimRatio, Positivity, Rational};

/// Integer-valued affine bound `a n + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub a: i64,
    pub b: i64,
}

impl Affine {
    pub const fn new(a: i64, b: i64) -> Self {
        Affine { a, b }
    }

    pub const fn constant(b: i64) -> Self {
        Affine { a: 0, b }
    }

    pub fn at(&self, n: i64) -> i64 {
        self.a * n + self.b
    }

    pub fn to_poly(&self) -> DimPoly {
        DimPoly::affine(self.a, self.b)
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_poly().to_string())
    }
}

/// `start (start - step) ... stop` with bounds affine in `n`. A stop exactly
/// one step above the start is the empty product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RangeProduct {
    pub start: Affine,
    pub stop: Affine,
    pub step: i64,
}

impl RangeProduct {
    pub fn new(start: Affine, stop: Affine, step: i64) -> Result<Self, CoefError> {
        if step <= 0 {
            return Err(CoefError::MalformedRange(format!("step {step} must be positive")));
        }
        Ok(RangeProduct { start, stop, step })
    }

    /// The integer factors at dimension `n`, largest first.
    pub fn factors_at(&self, n: i64) -> Result<Vec<i64>, CoefError> {
        let s = self.start.at(n);
        let t = self.stop.at(n);
        if s - t < -self.step || (s - t).rem_euclid(self.step) != 0 {
            return Err(CoefError::MalformedRange(format!(
                "{self} at n = {n}: {t} is not reachable from {s}"
            )));
        }
        let mut out = vec![];
        let mut v = s;
        while v >= t {
            out.push(v);
            v -= self.step;
        }
        Ok(out)
    }

    pub fn eval_at(&self, n: i64) -> Result<Rational, CoefError> {
        Ok(self
            .factors_at(n)?
            .into_iter()
            .fold(Rational::one(), |acc, v| acc * int(v)))
    }

    /// Sign of the product on all even `n >= n0`, if constant there.
    fn sign_from(&self, n0: i64) -> Option<i64> {
        let diff = Affine::new(self.start.a - self.stop.a, self.start.b - self.stop.b);
        let n0 = n0 + n0.rem_euclid(2);
        if diff.a < 0 || diff.at(n0) < 0 {
            return None;
        }
        if self.stop.a >= 0 && self.stop.at(n0) > 0 {
            Some(1)
        } else {
            None
        }
    }
}

impl fmt::Display for RangeProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.step == 1 {
            write!(f, "prod({} .. {})", self.start, self.stop)
        } else {
            write!(f, "prod({} .. {} by {})", self.start, self.stop, self.step)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProdFactor {
    Poly(DimPoly),
    Range(RangeProduct),
}

impl ProdFactor {
    pub fn eval_at(&self, n: i64) -> Result<Rational, CoefError> {
        match self {
            ProdFactor::Poly(p) => Ok(p.eval_int(n)),
            ProdFactor::Range(r) => r.eval_at(n),
        }
    }

    fn sign_from(&self, n0: i64) -> Option<i64> {
        match self {
            ProdFactor::Range(r) => r.sign_from(n0),
            ProdFactor::Poly(p) => {
                let r = DimRatio::from_poly(p.clone());
                if r.positive_for_all_n_geq(n0).holds() {
                    Some(1)
                } else if (-&r).positive_for_all_n_geq(n0).holds() {
                    Some(-1)
                } else {
                    None
                }
            }
        }
    }
}

impl fmt::Display for ProdFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProdFactor::Poly(p) if p.is_monomial() => write!(f, "{p}"),
            ProdFactor::Poly(p) => write!(f, "({p})"),
            ProdFactor::Range(r) => write!(f, "{r}"),
        }
    }
}

/// `coef * prod(num) / prod(den)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProdRatio {
    pub coef: Rational,
    pub num: Vec<ProdFactor>,
    pub den: Vec<ProdFactor>,
}

impl ProdRatio {
    pub fn constant(c: Rational) -> Self {
        ProdRatio {
            coef: c,
            num: vec![],
            den: vec![],
        }
    }

    pub fn from_ratio(r: &DimRatio) -> Self {
        let (cn, pn) = r.num().primitive_part();
        let (cd, pd) = r.den().primitive_part();
        let mut out = ProdRatio::constant(cn / cd);
        if !pn.is_constant() {
            out.num.push(ProdFactor::Poly(pn));
        }
        if !pd.is_constant() {
            out.den.push(ProdFactor::Poly(pd));
        }
        out
    }

    pub fn over_range(c: Rational, r: RangeProduct) -> Self {
        ProdRatio {
            coef: c,
            num: vec![],
            den: vec![ProdFactor::Range(r)],
        }
    }

    pub fn mul(&self, o: &ProdRatio) -> ProdRatio {
        let mut num = self.num.clone();
        num.extend(o.num.iter().cloned());
        let mut den = self.den.clone();
        den.extend(o.den.iter().cloned());
        ProdRatio {
            coef: &self.coef * &o.coef,
            num,
            den,
        }
    }

    pub fn recip(&self) -> Result<ProdRatio, CoefError> {
        if self.coef.is_zero() {
            return Err(CoefError::DivisionByZero);
        }
        Ok(ProdRatio {
            coef: Rational::one() / &self.coef,
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    pub fn eval_at(&self, n: i64) -> Result<Rational, CoefError> {
        let mut acc = self.coef.clone();
        for f in &self.num {
            acc *= f.eval_at(n)?;
        }
        for f in &self.den {
            let v = f.eval_at(n)?;
            if v.is_zero() {
                return Err(CoefError::Pole {
                    n,
                    factor: f.to_string(),
                });
            }
            acc /= v;
        }
        Ok(acc)
    }

    /// Positivity on all even `n >= n0`, decided factor by factor.
    pub fn positive_for_all_n_geq(&self, n0: i64) -> Positivity {
        if self.coef.is_zero() {
            return Positivity::IdenticallyZero;
        }
        let mut sign = if self.coef.is_positive() { 1 } else { -1 };
        for f in self.num.iter().chain(&self.den) {
            match f.sign_from(n0) {
                Some(s) => sign *= s,
                None => return Positivity::NotPositive,
            }
        }
        if sign > 0 {
            Positivity::Positive
        } else {
            Positivity::NotPositive
        }
    }
}

fn side(c: &num::BigInt, fs: &[ProdFactor]) -> (String, usize) {
    let mut parts = vec![];
    if !c.is_one() || fs.is_empty() {
        parts.push(c.to_string());
    }
    parts.extend(fs.iter().map(|f| f.to_string()));
    let k = parts.len();
    (parts.join(" * "), k)
}

impl fmt::Display for ProdRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coef.is_zero() {
            return f.write_str("0");
        }
        let (top, _) = side(self.coef.numer(), &self.num);
        if self.den.is_empty() && self.coef.denom().is_one() {
            return f.write_str(&top);
        }
        let (bot, k) = side(self.coef.denom(), &self.den);
        if k > 1 {
            write!(f, "{top} / ({bot})")
        } else {
            write!(f, "{top} / {bot}")
        }
    }
}
