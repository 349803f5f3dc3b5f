use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, Integer, One, Signed, Zero};

use super::{int, Rational};

/// Dense univariate polynomial, coefficient `i` multiplies `n^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DimPoly {
    coeffs: Vec<Rational>,
}

impl DimPoly {
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DimPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn zero() -> Self {
        DimPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The polynomial `n`.
    pub fn var() -> Self {
        Self::from_ints(&[0, 1])
    }

    /// `n - c`.
    pub fn n_minus(c: i64) -> Self {
        Self::from_ints(&[-c, 1])
    }

    /// `a n + b`.
    pub fn affine(a: i64, b: i64) -> Self {
        Self::from_ints(&[b, a])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rational::one() / self.leading()))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_int(&self, n: i64) -> Rational {
        self.eval(&int(n))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &DimPoly) -> (DimPoly, DimPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (DimPoly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] = &r[i + j] - &c * dc;
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (DimPoly::from_coeffs(q), DimPoly::from_coeffs(r))
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, other: &DimPoly) -> DimPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Factor `self = c * p` with `p` having coprime integer coefficients and
    /// a positive leading coefficient.
    pub fn primitive_part(&self) -> (Rational, DimPoly) {
        if self.is_zero() {
            return (Rational::zero(), DimPoly::zero());
        }
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = l.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if self.leading().is_negative() {
            g = -g;
        }
        let p = DimPoly::from_coeffs(
            ints.into_iter()
                .map(|c| Rational::from_integer(c / &g))
                .collect(),
        );
        (Rational::new(g, l), p)
    }

    pub fn pow(&self, e: u32) -> DimPoly {
        let mut acc = DimPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Cauchy bound: every real root has absolute value below this.
    pub fn root_bound(&self) -> Rational {
        if self.degree().unwrap_or(0) == 0 {
            return Rational::zero();
        }
        let lead = self.leading().abs();
        let mut m = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let q = c.abs() / &lead;
            if q > m {
                m = q;
            }
        }
        m + Rational::one()
    }

    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push(if neg { '-' } else { '+' });
            }
            let mon = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if i == 0 {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&mon);
            } else if a.is_integer() {
                out.push_str(&format!("{a}{mon}"));
            } else {
                out.push_str(&format!("({a}){mon}"));
            }
        }
        out
    }

    /// True when the printed form is a single monomial, so it needs no
    /// parentheses as a factor.
    pub fn is_monomial(&self) -> bool {
        self.coeffs.iter().filter(|c| !c.is_zero()).count() <= 1
    }
}

impl fmt::Display for DimPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("n"))
    }
}

impl Add for &DimPoly {
    type Output = DimPoly;
    fn add(self, o: &DimPoly) -> DimPoly {
        let len = self.coeffs.len().max(o.coeffs.len());
        DimPoly::from_coeffs((0..len).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &DimPoly {
    type Output = DimPoly;
    fn sub(self, o: &DimPoly) -> DimPoly {
        let len = self.coeffs.len().max(o.coeffs.len());
        DimPoly::from_coeffs((0..len).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &DimPoly {
    type Output = DimPoly;
    fn mul(self, o: &DimPoly) -> DimPoly {
        if self.is_zero() || o.is_zero() {
            return DimPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        DimPoly::from_coeffs(out)
    }
}

impl Neg for &DimPoly {
    type Output = DimPoly;
    fn neg(self) -> DimPoly {
        DimPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for DimPoly {
            type Output = DimPoly;
            fn $m(self, o: DimPoly) -> DimPoly {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display() {
        assert_eq!(DimPoly::n_minus(3).to_string(), "n-3");
        assert_eq!(DimPoly::from_ints(&[-8, 2]).to_string(), "2n-8");
        assert_eq!(DimPoly::from_ints(&[3, -1]).to_string(), "-n+3");
        assert_eq!(DimPoly::from_ints(&[0, 0, 1]).to_string(), "n^2");
        assert_eq!(DimPoly::zero().to_string(), "0");
    }

    #[test]
    fn division() {
        let p = &DimPoly::n_minus(3) * &DimPoly::n_minus(4);
        let (q, r) = p.div_rem(&DimPoly::n_minus(4));
        assert_eq!(q, DimPoly::n_minus(3));
        assert!(r.is_zero());
    }

    #[test]
    fn gcd_is_monic() {
        let a = &DimPoly::from_ints(&[-6, 2]) * &DimPoly::n_minus(5);
        let b = &DimPoly::from_ints(&[-3, 1]) * &DimPoly::n_minus(7);
        assert_eq!(a.gcd(&b), DimPoly::n_minus(3));
    }

    #[test]
    fn primitive() {
        let p = DimPoly::from_coeffs(vec![super::super::rat(-3, 2), super::super::rat(1, 2)]);
        let (c, q) = p.primitive_part();
        assert_eq!(c, super::super::rat(1, 2));
        assert_eq!(q, DimPoly::n_minus(3));
    }
}
