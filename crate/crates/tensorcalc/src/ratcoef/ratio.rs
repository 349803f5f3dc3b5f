use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use super::{int, CoefError, DimPoly, Positivity, Rational};

/// Reduced rational function of `n`; the denominator is monic and coprime
/// to the numerator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimRatio {
    num: DimPoly,
    den: DimPoly,
}

impl DimRatio {
    pub fn new(num: DimPoly, den: DimPoly) -> Result<Self, CoefError> {
        if den.is_zero() {
            return Err(CoefError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: DimPoly, den: DimPoly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let l = Rational::one() / den.leading();
        DimRatio {
            num: num.scale(&l),
            den: den.scale(&l),
        }
    }

    pub fn zero() -> Self {
        DimRatio {
            num: DimPoly::zero(),
            den: DimPoly::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        DimRatio {
            num: DimPoly::constant(r),
            den: DimPoly::one(),
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational(int(v))
    }

    pub fn from_poly(p: DimPoly) -> Self {
        DimRatio {
            num: p,
            den: DimPoly::one(),
        }
    }

    pub fn n() -> Self {
        Self::from_poly(DimPoly::var())
    }

    /// `1 / (n - c)`.
    pub fn inv_n_minus(c: i64) -> Self {
        Self::reduce(DimPoly::one(), DimPoly::n_minus(c))
    }

    pub fn num(&self) -> &DimPoly {
        &self.num
    }

    pub fn den(&self) -> &DimPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant() && self.num.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_constant() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::reduce(self.num.scale(c), self.den.clone())
    }

    pub fn recip(&self) -> Result<Self, CoefError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, o: &DimRatio) -> Result<Self, CoefError> {
        if o.is_zero() {
            return Err(CoefError::DivisionByZero);
        }
        Ok(Self::reduce(&self.num * &o.den, &self.den * &o.num))
    }

    pub fn eval_at(&self, n: i64) -> Result<Rational, CoefError> {
        let d = self.den.eval_int(n);
        if d.is_zero() {
            return Err(CoefError::Pole {
                n,
                factor: self.vanishing_factor(n),
            });
        }
        Ok(self.num.eval_int(n) / d)
    }

    fn vanishing_factor(&self, n: i64) -> String {
        // the linear factor (n - n0) always divides a denominator vanishing at n0
        let lin = DimPoly::n_minus(n);
        let (_, r) = self.den.div_rem(&lin);
        if r.is_zero() {
            lin.to_string()
        } else {
            self.den.to_string()
        }
    }

    /// Decide `r(n) > 0` for every even `n >= n0`.
    pub fn positive_for_all_n_geq(&self, n0: i64) -> Positivity {
        if self.is_zero() {
            return Positivity::IdenticallyZero;
        }
        let bound = self.num.root_bound().max(self.den.root_bound());
        let lead_sign = (self.num.leading() * self.den.leading()).is_positive();
        if !lead_sign {
            return Positivity::NotPositive;
        }
        let b = bound.ceil().to_integer();
        let mut n = if n0 % 2 == 0 { n0 } else { n0 + 1 };
        while num::BigInt::from(n) <= b {
            match self.eval_at(n) {
                Ok(v) if v.is_positive() => {}
                _ => return Positivity::NotPositive,
            }
            n += 2;
        }
        Positivity::Positive
    }

    pub fn pow(&self, e: u32) -> Self {
        DimRatio {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }
}

impl Default for DimRatio {
    fn default() -> Self {
        Self::zero()
    }
}

/// Ascending-order rendering used for negated denominators, so that
/// `-(n-3)` prints as `3-n`.
fn ascending(p: &DimPoly) -> String {
    let mut out = String::new();
    for (i, c) in p.coeffs().iter().enumerate() {
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
            1 => "n".into(),
            _ => format!("n^{i}"),
        };
        if i == 0 {
            out.push_str(&a.to_string());
        } else if a.is_one() {
            out.push_str(&mon);
        } else {
            out.push_str(&format!("{a}{mon}"));
        }
    }
    out
}

fn needs_parens(s: &str) -> bool {
    s.chars().skip(1).any(|c| c == '+' || c == '-' || c == '/')
}

impl fmt::Display for DimRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let (cn, pn) = self.num.primitive_part();
        let (cd, pd) = self.den.primitive_part();
        let c = cn / cd;
        let top = pn.scale(&Rational::from_integer(c.numer().clone()));
        let bot = pd.scale(&Rational::from_integer(c.denom().clone()));
        if bot.is_constant() {
            let s = top.to_string();
            let d = bot.leading();
            if d.is_one() {
                return f.write_str(&s);
            }
            return if needs_parens(&s) {
                write!(f, "({s})/{d}")
            } else {
                write!(f, "{s}/{d}")
            };
        }
        if let Some(k) = top.as_constant() {
            if k.is_negative() {
                return write!(f, "{}/({})", -k, ascending(&(-&bot)));
            }
        }
        let s = top.to_string();
        let b = bot.to_string();
        let s = if needs_parens(&s) { format!("({s})") } else { s };
        let b = if b == "n" || bot.is_constant() { b } else { format!("({b})") };
        write!(f, "{s}/{b}")
    }
}

impl Add for &DimRatio {
    type Output = DimRatio;
    fn add(self, o: &DimRatio) -> DimRatio {
        if self.den == o.den {
            return DimRatio::reduce(&self.num + &o.num, self.den.clone());
        }
        DimRatio::reduce(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }
}

impl Sub for &DimRatio {
    type Output = DimRatio;
    fn sub(self, o: &DimRatio) -> DimRatio {
        self + &(-o)
    }
}

impl Mul for &DimRatio {
    type Output = DimRatio;
    fn mul(self, o: &DimRatio) -> DimRatio {
        if self.is_zero() || o.is_zero() {
            return DimRatio::zero();
        }
        DimRatio::reduce(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Neg for &DimRatio {
    type Output = DimRatio;
    fn neg(self) -> DimRatio {
        DimRatio {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for DimRatio {
    type Output = DimRatio;
    fn neg(self) -> DimRatio {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for DimRatio {
            type Output = DimRatio;
            fn $m(self, o: DimRatio) -> DimRatio {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl From<Rational> for DimRatio {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{falling_product, rat};
    use super::*;
    use proptest::prelude::*;

    fn r(num: &[i64], den: &[i64]) -> DimRatio {
        DimRatio::new(DimPoly::from_ints(num), DimPoly::from_ints(den)).unwrap()
    }

    #[test]
    fn additive_identity() {
        let a = DimRatio::inv_n_minus(3);
        assert_eq!(&a + &DimRatio::zero(), a);
        assert_eq!(a.to_string(), "1/(n-3)");
    }

    #[test]
    fn multiplicative_inverse() {
        let a = r(&[-3, 1], &[-2, 1]);
        let b = r(&[-2, 1], &[-3, 1]);
        assert!((&a * &b).is_one());
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(
            DimRatio::one().checked_div(&DimRatio::zero()),
            Err(CoefError::DivisionByZero)
        );
        assert!(DimRatio::new(DimPoly::one(), DimPoly::zero()).is_err());
    }

    #[test]
    fn eval_and_pole() {
        let a = DimRatio::inv_n_minus(3);
        assert_eq!(a.eval_at(10).unwrap(), rat(1, 7));
        match a.eval_at(3) {
            Err(CoefError::Pole { n, factor }) => {
                assert_eq!(n, 3);
                assert_eq!(factor, "n-3");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn falling_product_at_ten() {
        let p = falling_product(&DimPoly::n_minus(3), &DimPoly::n_minus(6), 1).unwrap();
        assert_eq!(p.eval_int(10), int(840));
        let inv = DimRatio::new(DimPoly::constant(int(4)), p).unwrap();
        assert_eq!(inv.eval_at(10).unwrap(), rat(1, 210));
    }

    #[test]
    fn weight_factor_nonzero() {
        // 2w + n - 2k at w = 2 - n, k = 0
        let w = DimPoly::from_ints(&[2, -1]);
        let f = &(&w + &w) + &DimPoly::var();
        assert_eq!(f, DimPoly::from_ints(&[4, -1]));
        for n in (6..40).step_by(2) {
            assert!(!f.eval_int(n).is_zero());
        }
    }

    #[test]
    fn display_forms() {
        assert_eq!(r(&[-3, 1], &[-8, 2]).to_string(), "(n-3)/(2n-8)");
        assert_eq!(r(&[-1], &[-3, 1]).to_string(), "1/(3-n)");
        assert_eq!(r(&[1], &[2]).to_string(), "1/2");
        assert_eq!(r(&[-3, 1], &[2]).to_string(), "(n-3)/2");
        assert_eq!(r(&[0, 2], &[1]).to_string(), "2n");
        assert_eq!(r(&[1], &[0, 1]).to_string(), "1/n");
    }

    #[test]
    fn positivity() {
        assert_eq!(r(&[-1], &[-3, 1]).positive_for_all_n_geq(6), Positivity::NotPositive);
        assert_eq!(r(&[-3, 1], &[-8, 2]).positive_for_all_n_geq(6), Positivity::Positive);
        assert_eq!(DimRatio::zero().positive_for_all_n_geq(6), Positivity::IdenticallyZero);
        // positive eventually but not at n = 4
        assert_eq!(r(&[-5, 1], &[1]).positive_for_all_n_geq(4), Positivity::NotPositive);
        assert_eq!(r(&[-5, 1], &[1]).positive_for_all_n_geq(6), Positivity::Positive);
    }

    /// y-row identity (6+2y)(4+2y)/((y+2)(y+1)) - 4(4+2y)/(y+1) + 4, with the
    /// variable `n` standing for `y`.
    fn y_row() -> DimRatio {
        let lin = |a: i64, b: i64| DimPoly::affine(a, b);
        let t1 = DimRatio::new(&lin(2, 6) * &lin(2, 4), &lin(1, 2) * &lin(1, 1)).unwrap();
        let t2 = DimRatio::new(lin(2, 4).scale(&int(4)), lin(1, 1)).unwrap();
        &(&t1 - &t2) + &DimRatio::from_int(4)
    }

    #[test]
    fn y_row_vanishes_identically() {
        assert!(y_row().is_zero());
    }

    #[test]
    fn y_row_vanishes_pointwise() {
        for y in 0..=10i64 {
            let t1 = rat((6 + 2 * y) * (4 + 2 * y), (y + 2) * (y + 1));
            let t2 = rat(4 * (4 + 2 * y), y + 1);
            assert!((t1 - t2 + int(4)).is_zero());
        }
    }

    fn small_ratio() -> impl Strategy<Value = DimRatio> {
        (
            prop::collection::vec(-6i64..6, 1..4),
            prop::collection::vec(-6i64..6, 1..3),
            -5i64..5,
        )
            .prop_filter_map("nonzero denominator", |(a, b, s)| {
                let mut den = DimPoly::from_ints(&b);
                if den.is_zero() {
                    return None;
                }
                den = &den * &DimPoly::n_minus(s);
                DimRatio::new(DimPoly::from_ints(&a), den).ok()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn distributive(a in small_ratio(), b in small_ratio(), c in small_ratio()) {
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        }

        #[test]
        fn reduce_idempotent(a in small_ratio()) {
            let again = DimRatio::new(a.num().clone(), a.den().clone()).unwrap();
            prop_assert_eq!(again, a);
        }

        #[test]
        fn eval_commutes(a in small_ratio(), b in small_ratio(), n in 6i64..30) {
            if let (Ok(x), Ok(y)) = (a.eval_at(n), b.eval_at(n)) {
                prop_assert_eq!((&a + &b).eval_at(n).unwrap(), &x + &y);
                prop_assert_eq!((&a * &b).eval_at(n).unwrap(), &x * &y);
                if !y.is_zero() {
                    prop_assert_eq!(a.checked_div(&b).unwrap().eval_at(n).unwrap(), &x / &y);
                }
            }
        }

        #[test]
        fn display_parses_back(a in small_ratio()) {
            let s = a.to_string();
            let back = super::super::parse_coef(&s, None).unwrap().into_ratio().unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
