//! Truncated Taylor series in the base coordinates with coefficients that
//! are truncated polynomials in the grading parameter `t`.
//!
//! Series use the divided-power basis `x^a / a!`, so a partial derivative is
//! a coefficient shift and products pick up multinomial factors. With
//! integer jets every coefficient stays integral.

use std::collections::HashMap;

/// Number of `t` coefficients carried (degrees `0..TD`).
pub const TD: usize = 6;
pub type TP = [i128; TD];

pub const TZERO: TP = [0; TD];

pub fn tp_is_zero(x: &TP) -> bool {
    x.iter().all(|&v| v == 0)
}

pub fn tp_add(acc: &mut TP, x: &TP) {
    for i in 0..TD {
        acc[i] += x[i];
    }
}

pub fn tp_sub(acc: &mut TP, x: &TP) {
    for i in 0..TD {
        acc[i] -= x[i];
    }
}

pub fn tp_scale(x: &TP, k: i128) -> TP {
    let mut out = TZERO;
    for i in 0..TD {
        out[i] = x[i] * k;
    }
    out
}

/// Product truncated at degree `dmax`.
pub fn tp_mul(x: &TP, y: &TP, dmax: usize) -> TP {
    let mut out = TZERO;
    for i in 0..=dmax {
        if x[i] == 0 {
            continue;
        }
        for j in 0..=dmax - i {
            out[i + j] += x[i] * y[j];
        }
    }
    out
}

/// Monomial bookkeeping for `n` variables up to total degree `kmax`.
pub struct Monos {
    pub n: usize,
    pub kmax: usize,
    pub exps: Vec<Vec<u8>>,
    pub deg: Vec<usize>,
    /// `upto[d]`: number of monomials of degree at most `d`.
    pub upto: Vec<usize>,
    shift: Vec<Vec<usize>>,
    mul: Vec<Vec<(u32, u32, i128)>>,
}

fn compositions(n: usize, d: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        let n = cur.len();
        if i == n - 1 {
            cur[i] = left as u8;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[i] = v as u8;
            rec(i + 1, left - v, cur, out);
        }
    }
    let mut cur = vec![0u8; n];
    rec(0, d, &mut cur, out);
}

fn binom(a: u64, b: u64) -> i128 {
    let mut r: i128 = 1;
    for i in 0..b {
        r = r * (a - i) as i128 / (i + 1) as i128;
    }
    r
}

impl Monos {
    pub fn new(n: usize, kmax: usize) -> Self {
        let mut exps = vec![];
        let mut upto = vec![];
        for d in 0..=kmax {
            compositions(n, d, &mut exps);
            upto.push(exps.len());
        }
        let deg: Vec<usize> = exps.iter().map(|e| e.iter().map(|&x| x as usize).sum()).collect();
        let index: HashMap<Vec<u8>, usize> = exps.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let shift = exps
            .iter()
            .map(|e| {
                (0..n)
                    .map(|a| {
                        let mut f = e.clone();
                        f[a] += 1;
                        index.get(&f).copied().unwrap_or(usize::MAX)
                    })
                    .collect()
            })
            .collect();
        let mut mul = vec![];
        for (i, ei) in exps.iter().enumerate() {
            let mut row = vec![];
            for (j, ej) in exps.iter().enumerate() {
                if deg[i] + deg[j] > kmax {
                    break;
                }
                let s: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                let m: i128 = ei.iter().zip(ej).map(|(&a, &b)| binom((a + b) as u64, a as u64)).product();
                row.push((j as u32, index[&s] as u32, m));
            }
            mul.push(row);
        }
        Monos {
            n,
            kmax,
            exps,
            deg,
            upto,
            shift,
            mul,
        }
    }
}

/// Series valid through total degree `k`.
#[derive(Clone, Debug)]
pub struct Series {
    pub k: usize,
    pub c: Vec<TP>,
}

impl Series {
    pub fn zero(m: &Monos, k: usize) -> Self {
        Series {
            k,
            c: vec![TZERO; m.upto[k]],
        }
    }

    pub fn constant(m: &Monos, k: usize, v: TP) -> Self {
        let mut s = Self::zero(m, k);
        s.c[0] = v;
        s
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(tp_is_zero)
    }

    pub fn at_origin(&self) -> TP {
        self.c[0]
    }

    pub fn truncate(&self, m: &Monos, k: usize) -> Self {
        let k = k.min(self.k);
        Series {
            k,
            c: self.c[..m.upto[k]].to_vec(),
        }
    }

    pub fn add_assign(&mut self, o: &Series) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            tp_add(a, b);
        }
    }

    pub fn sub_assign(&mut self, o: &Series) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            tp_sub(a, b);
        }
    }

    pub fn scale(&self, k: i128) -> Series {
        Series {
            k: self.k,
            c: self.c.iter().map(|x| tp_scale(x, k)).collect(),
        }
    }

    /// Partial derivative in direction `a`.
    pub fn deriv(&self, m: &Monos, a: usize) -> Series {
        assert!(self.k > 0, "derivative of a degree-0 series");
        let k = self.k - 1;
        let c = (0..m.upto[k]).map(|i| self.c[m.shift[i][a]]).collect();
        Series { k, c }
    }

    /// `acc += self * o`, truncated at `acc.k` and `t^dmax`.
    pub fn mul_into(&self, o: &Series, m: &Monos, dmax: usize, acc: &mut Series) {
        let k = acc.k.min(self.k).min(o.k);
        for i in 0..m.upto[k] {
            let a = &self.c[i];
            if tp_is_zero(a) {
                continue;
            }
            let lim = m.upto[k - m.deg[i]];
            for &(j, r, mult) in &m.mul[i] {
                let j = j as usize;
                if j >= lim {
                    break;
                }
                let b = &o.c[j];
                if tp_is_zero(b) {
                    continue;
                }
                let p = tp_mul(a, b, dmax);
                let dst = &mut acc.c[r as usize];
                for d in 0..=dmax {
                    dst[d] += mult * p[d];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1(v: i128) -> TP {
        let mut x = TZERO;
        x[0] = v;
        x
    }

    #[test]
    fn product_rule_in_divided_powers() {
        // f = x0, f*f = x0^2 = 2 * (x0^2/2!)
        let m = Monos::new(2, 3);
        let mut f = Series::zero(&m, 3);
        f.c[m.shift[0][0]] = t1(1);
        let mut sq = Series::zero(&m, 3);
        f.mul_into(&f, &m, 0, &mut sq);
        let i = m.shift[m.shift[0][0]][0];
        assert_eq!(sq.c[i][0], 2);
        // d/dx0 of x0^2 = 2 x0
        let d = sq.deriv(&m, 0);
        assert_eq!(d.c[m.shift[0][0]][0], 2);
    }

    #[test]
    fn monomial_counts() {
        let m = Monos::new(6, 4);
        assert_eq!(m.upto, vec![1, 7, 28, 84, 210]);
    }
}
