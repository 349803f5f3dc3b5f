//! Numeric oracle: exact evaluation of contractions on random polynomial
//! metric jets.
//!
//! A jet is `g = delta + t h` with `h` a sum of plane waves
//! `e (k.x)^p / p!`, `p >= 2`, so `h(0) = 0` and `dh(0) = 0`. Scalar
//! functions are `psi_h = t f_h` with `f_h` a sum of waves `c (k.x)^p / p!`.
//! Every factor is `O(t)`, so the `t^sigma` coefficient of a length-`sigma`
//! contraction is its leading part and longer contractions only start at
//! higher powers of `t`.
//!
//! Two evaluation paths exist:
//! * [`evaluate`]: full nonlinear Taylor computation (metric inverse,
//!   Christoffel symbols, curvature, ordered covariant derivatives) in small
//!   dimension;
//! * the leading path used by [`graded_coefficient`] for terms whose length
//!   equals the requested grade: plane-wave factor expansions contracted as
//!   a network of vectors and matrices, usable in any dimension.

mod full;
mod leading;
pub mod series;

use std::fmt;

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{Contraction, FactorKind, LinComb};
use crate::ratcoef::{CoefError, Rational};

pub use full::bianchi_residuals;

/// Largest dimension accepted by the full nonlinear path.
pub const FULL_MAX_N: usize = 8;

const WAVES_PER_DEGREE: usize = 2;
const AUX_LABEL: u32 = u32::MAX;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NumError {
    #[error("jet order {have} is insufficient: order {need} needed")]
    Order { have: usize, need: usize },
    #[error("contraction has {0} free indices; only complete contractions evaluate to numbers")]
    NotComplete(usize),
    #[error(transparent)]
    Coef(#[from] CoefError),
    #[error("{0}")]
    Unsupported(String),
}

/// `e (k.x)^p / p!` in the metric perturbation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wave {
    pub p: usize,
    pub k: Vec<i64>,
    pub e: Vec<Vec<i64>>,
}

/// `c (k.x)^p / p!` in a scalar function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnWave {
    pub p: usize,
    pub c: i64,
    pub k: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricJet {
    pub n: usize,
    pub order: usize,
    pub seed: u64,
    pub waves: Vec<Wave>,
    /// Axis relabelling applied to generated function waves.
    axes: Vec<usize>,
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

/// Deterministic random jet. Waves of every degree `2..=order` are present.
pub fn make_random_jet(n: usize, order: usize, seed: u64) -> MetricJet {
    assert!(n >= 2 && order >= 2, "jet needs n >= 2 and order >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut waves = vec![];
    for p in 2..=order {
        for _ in 0..WAVES_PER_DEGREE {
            let k = random_vec(&mut rng, n);
            let mut e = vec![vec![0i64; n]; n];
            for a in 0..n {
                for b in a..n {
                    let v = rng.gen_range(-2..=2);
                    e[a][b] = v;
                    e[b][a] = v;
                }
            }
            waves.push(Wave { p, k, e });
        }
    }
    MetricJet {
        n,
        order,
        seed,
        waves,
        axes: (0..n).collect(),
    }
}

impl MetricJet {
    /// Jet with explicit metric waves; scalar functions come from `seed`.
    pub fn from_waves(n: usize, order: usize, seed: u64, waves: Vec<Wave>) -> Self {
        MetricJet {
            n,
            order,
            seed,
            waves,
            axes: (0..n).collect(),
        }
    }

    /// `h = 0`; scalar functions stay random.
    pub fn flat(n: usize, order: usize, seed: u64) -> Self {
        let mut j = make_random_jet(n, order, seed);
        j.waves.clear();
        j
    }

    /// The same geometry with coordinate axes relabelled by `perm`.
    pub fn permute_axes(&self, perm: &[usize]) -> Self {
        let n = self.n;
        assert_eq!(perm.len(), n);
        let mv = |v: &[i64]| {
            let mut out = vec![0; n];
            for a in 0..n {
                out[perm[a]] = v[a];
            }
            out
        };
        let waves = self
            .waves
            .iter()
            .map(|w| {
                let mut e = vec![vec![0; n]; n];
                for a in 0..n {
                    for b in 0..n {
                        e[perm[a]][perm[b]] = w.e[a][b];
                    }
                }
                Wave {
                    p: w.p,
                    k: mv(&w.k),
                    e,
                }
            })
            .collect();
        MetricJet {
            n,
            order: self.order,
            seed: self.seed,
            waves,
            axes: self.axes.iter().map(|&a| perm[a]).collect(),
        }
    }

    /// Waves of a scalar function (`AuxFn` uses its own label).
    pub fn fn_waves(&self, kind: FactorKind) -> Vec<FnWave> {
        let label = match kind {
            FactorKind::ScalarFn(h) => h,
            FactorKind::AuxFn => AUX_LABEL,
            _ => return vec![],
        };
        let s = self.seed ^ (u64::from(label) + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut out = vec![];
        for p in 0..=self.order {
            for _ in 0..WAVES_PER_DEGREE {
                let c = rng.gen_range(1..=3);
                let k0 = random_vec(&mut rng, self.n);
                let mut k = vec![0; self.n];
                for a in 0..self.n {
                    k[self.axes[a]] = k0[a];
                }
                out.push(FnWave { p, c, k });
            }
        }
        out
    }

    fn check_order(&self, c: &Contraction) -> Result<(), NumError> {
        for f in c.factors() {
            let need = match f.kind {
                FactorKind::Metric => 0,
                FactorKind::ScalarFn(_) | FactorKind::AuxFn => f.m,
                FactorKind::Perturbation => {
                    return Err(NumError::Unsupported("the perturbation h has no numeric value".into()))
                }
                _ => f.m + 2,
            };
            if need > self.order {
                return Err(NumError::Order { have: self.order, need });
            }
        }
        if !c.is_complete() {
            return Err(NumError::NotComplete(c.num_free()));
        }
        Ok(())
    }
}

/// Truncated polynomial in `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetValue(pub Vec<Rational>);

impl JetValue {
    pub fn zero(deg: usize) -> Self {
        JetValue(vec![Rational::zero(); deg + 1])
    }

    pub fn coeff(&self, d: usize) -> Rational {
        self.0.get(d).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add_scaled(&mut self, k: &Rational, o: &JetValue) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a += k * b;
        }
    }
}

impl fmt::Display for JetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c})t^{d}")?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Full evaluation through `t^(sigma+1)`.
pub fn evaluate(c: &Contraction, jet: &MetricJet) -> Result<JetValue, NumError> {
    evaluate_to(c, jet, (c.sigma() + 1).min(series::TD - 1))
}

/// Full evaluation through `t^dmax`.
pub fn evaluate_to(c: &Contraction, jet: &MetricJet, dmax: usize) -> Result<JetValue, NumError> {
    jet.check_order(c)?;
    if jet.n > FULL_MAX_N {
        return Err(NumError::Unsupported(format!(
            "full evaluation is limited to n <= {FULL_MAX_N}, got {}",
            jet.n
        )));
    }
    if dmax >= series::TD {
        return Err(NumError::Unsupported(format!("t-degree {dmax} exceeds {}", series::TD - 1)));
    }
    Ok(full::evaluate(c, jet, dmax))
}

/// Full evaluation of a combination with coefficients taken at the jet's
/// dimension.
pub fn evaluate_lc(lc: &LinComb, jet: &MetricJet, dmax: usize) -> Result<JetValue, NumError> {
    let mut out = JetValue::zero(dmax);
    for (k, c) in &lc.terms {
        let kv = k.eval_at(jet.n as i64)?;
        out.add_scaled(&kv, &evaluate_to(c, jet, dmax)?);
    }
    Ok(out)
}

/// `t^sigma` coefficient of a single complete contraction of length
/// `sigma`, by the plane-wave network path.
pub fn leading_value(c: &Contraction, jet: &MetricJet) -> Result<Rational, NumError> {
    jet.check_order(c)?;
    Ok(leading::evaluate(c, jet))
}

/// Coefficient of `t^sigma` in the evaluated combination. Terms longer than
/// `sigma` contribute nothing; terms of length `sigma` use the leading path;
/// shorter terms need the full path.
pub fn graded_coefficient(lc: &LinComb, jet: &MetricJet, sigma: usize) -> Result<Rational, NumError> {
    let mut out = Rational::zero();
    for (k, c) in &lc.terms {
        let s = c.sigma();
        if s > sigma {
            continue;
        }
        let kv = k.eval_at(jet.n as i64)?;
        if kv.is_zero() {
            continue;
        }
        let v = if s == sigma {
            leading_value(c, jet)?
        } else {
            evaluate_to(c, jet, sigma)?.coeff(sigma)
        };
        out += kv * v;
    }
    Ok(out)
}

/// True when `lc` evaluates to zero at grade `sigma` on every jet.
pub fn graded_zero_on(lc: &LinComb, jets: &[MetricJet], sigma: usize) -> Result<bool, NumError> {
    for j in jets {
        if !graded_coefficient(lc, j, sigma)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Seeded jets `seed0, seed0+1, ...`.
pub fn jets(n: usize, order: usize, seed0: u64, count: usize) -> Vec<MetricJet> {
    (0..count as u64).map(|i| make_random_jet(n, order, seed0 + i)).collect()
}

#[cfg(test)]
mod tests;
