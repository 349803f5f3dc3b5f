use std::collections::BTreeMap;

use super::*;
use crate::divergence::{canonical_quadratic, find_divergence, weyl_gradient_norm, SearchOpts};
use crate::ratcoef::{int, rat};

fn at(r: &DimRatio, n: i64) -> Rational {
    r.eval_at(n).unwrap()
}

#[test]
fn component_coefficients() {
    let c = obstruction_coefficient(CurvPattern::BaseBBBB, 1);
    for n in [6, 10, 14] {
        assert_eq!(at(&c, n), rat(1, n - 3));
    }
    // (n-3)(n-4)(n-6) at alpha = 3
    assert_eq!(at(&obstruction_coefficient(CurvPattern::BaseBBBB, 3), 12), rat(1, 9 * 8 * 6));
    assert_eq!(at(&obstruction_coefficient(CurvPattern::InfBBInf, 0), 10), rat(1, 42));
    assert_eq!(at(&obstruction_coefficient(CurvPattern::InfBBInf, 1), 10), rat(-1, 7 * 6 * 4));
    assert_eq!(at(&obstruction_coefficient(CurvPattern::InfBBB, 1), 10), rat(1, 42));
    assert_eq!(at(&obstruction_coefficient(CurvPattern::InfBBB, 0), 10), rat(-1, 7));
    assert_eq!(at(&obstruction_coefficient(CurvPattern::BaseBBBB, 0), 10), int(1));
}

#[test]
fn component_alpha_range() {
    assert!(d_infinity_curvature(CurvPattern::BaseBBBB, 3, 10).is_ok());
    assert!(matches!(
        d_infinity_curvature(CurvPattern::BaseBBBB, 4, 10),
        Err(AmbientError::AlphaOutOfRange { .. })
    ));
    assert!(d_infinity_curvature(CurvPattern::InfBBB, 3, 10).is_err());
    assert!(d_infinity_curvature(CurvPattern::InfBBInf, 1, 10).is_ok());
    assert!(d_infinity_curvature(CurvPattern::InfBBInf, 2, 10).is_err());
    assert!(matches!(d_infinity_curvature(CurvPattern::InfBBB, 0, 9), Err(AmbientError::Dimension(9))));
}

#[test]
fn component_values_have_expected_weight() {
    for (pat, free) in [(CurvPattern::BaseBBBB, 4), (CurvPattern::InfBBB, 3), (CurvPattern::InfBBInf, 2)] {
        for a in 0..=pat.max_alpha(12) as usize {
            let c = d_infinity_curvature(pat, a, 12).unwrap();
            assert!(!c.value.is_empty());
            for (_, t) in &c.value.terms {
                assert_eq!(t.num_free(), free);
                assert_eq!(t.sigma(), 1);
            }
        }
    }
}

#[test]
fn metric_derivatives() {
    use IndexClass::*;
    let m = d_infinity_metric(Infinity, Infinity, 1, true);
    assert_eq!(m.value.terms[0].0, DimRatio::from_int(-2));
    assert!(d_infinity_metric(Infinity, Infinity, 2, true).value.is_empty());
    assert!(d_infinity_metric(Zero, Infinity, 1, true).value.is_empty());
    let m = d_infinity_metric(Base, Base, 2, false);
    assert_eq!(m.value.len(), 2);
    assert_eq!(at(&m.value.terms[0].0, 10), rat(2, -6));
    assert!(m.q_remainder);
}

#[test]
fn laplacian_expansion_factors() {
    for n in [6, 10, 20] {
        let e = expand_laplacian_power(-4, 1, n).unwrap();
        assert_eq!(e.factors, vec![n - 8]);
    }
    assert!(matches!(expand_laplacian_power(-4, 1, 8), Err(AmbientError::VanishingFactor { .. })));
    for n in (10..=30).step_by(2) {
        let k = (n / 2 - 2) as usize;
        let e = expand_laplacian_power(-4, k, n).unwrap();
        let expect: Vec<i64> = (0..k as i64).map(|j| 4 - n + 2 * j).collect();
        assert_eq!(e.factors, expect);
        assert_eq!(*e.factors.last().unwrap(), -2);
    }
}

#[test]
fn row_braces_vanish_identically() {
    let b = y_row_braces();
    assert!(b.is_zero(), "{b}");
    for y in 0..=10 {
        let yr = int(y);
        let v = (int(6) + int(2) * &yr) * (int(4) + int(2) * &yr) / ((&yr + int(2)) * (&yr + int(1)))
            - int(4) * (int(4) + int(2) * &yr) / (&yr + int(1))
            + int(4);
        assert!(v.is_zero());
    }
}

#[test]
fn complete_rows_cancel_and_leftover_matches() {
    for n in (10..=20).step_by(2) {
        let rows = y_row_table(n).unwrap();
        for r in &rows {
            if r.first.is_some() {
                assert!(r.sum.is_zero(), "n={n} y={}", r.y);
            }
        }
        assert_eq!(leftover(n).unwrap(), leftover_closed_form(n).unwrap());
        let last = incomplete_row(n).unwrap().unwrap();
        assert_eq!(last.y as i64, n / 2 - 4);
        assert_eq!(displayed_constant(n).unwrap(), leftover(n).unwrap() + last.sum);
    }
    assert_eq!(leftover(10).unwrap(), rat(1, 42));
    assert_eq!(incomplete_row(10).unwrap().unwrap().sum, rat(-2, 147));
}

#[test]
fn displayed_constant_values_and_sign() {
    // direct summation of every block with exact fractions
    let frozen = [(10, rat(1, 98)), (12, rat(1, 972)), (14, rat(1, 11616)), (16, rat(1, 162240)), (18, rat(1, 2592000)), (20, rat(1, 46609920))];
    for (n, v) in frozen {
        assert_eq!(displayed_constant(n).unwrap(), v, "n={n}");
    }
}

// Independent recount: distribute the derivatives over the six factors of
// g g g g R R and assign every contracted pair a direction.
fn brute_multiplicities(n: i64) -> BTreeMap<(usize, usize, usize), u64> {
    let total = (n / 2 - 2) as usize;
    let mut out = BTreeMap::new();
    let mut counts = [0usize; 6];
    fn rec(pos: usize, total: usize, counts: &mut [usize; 6], n: i64, out: &mut BTreeMap<(usize, usize, usize), u64>) {
        if pos == total {
            // pair p joins slot p of both curvature factors
            for dirs in 0..16u32 {
                let inf: Vec<bool> = (0..4).map(|p| dirs >> p & 1 == 1).collect();
                let ok_metric = (0..4).all(|p| counts[p] == usize::from(inf[p]));
                let s = inf.iter().filter(|&&b| b).count();
                let ok_pairs = !(inf[0] && inf[1]) && !(inf[2] && inf[3]);
                if !ok_metric || !ok_pairs {
                    continue;
                }
                let pat = [CurvPattern::BaseBBBB, CurvPattern::InfBBB, CurvPattern::InfBBInf][s];
                let (a1, a2) = (counts[4], counts[5]);
                if a1 as i64 > pat.max_alpha(n) || a2 as i64 > pat.max_alpha(n) {
                    continue;
                }
                *out.entry((s, a1, a2)).or_insert(0) += 1;
            }
            return;
        }
        for f in 0..6 {
            counts[f] += 1;
            rec(pos + 1, total, counts, n, out);
            counts[f] -= 1;
        }
    }
    rec(0, total, &mut counts, n, &mut out);
    out
}

#[test]
fn leibniz_multiplicities_match_recount() {
    for n in [8, 10, 12] {
        let brute = brute_multiplicities(n);
        let exp = leibniz_expand_norm_squared(n).unwrap();
        let mut mine = BTreeMap::new();
        for t in &exp.terms {
            let s = match t.block {
                Block::Leading | Block::FirstSum => 0,
                Block::SecondSum => 1,
                Block::ThirdSum => 2,
            };
            mine.insert((s, t.alpha.0, t.alpha.1), t.multiplicity.to_string().parse::<u64>().unwrap());
        }
        assert_eq!(mine, brute, "n={n}");
    }
}

#[test]
fn engine_reduction_matches_closed_form_blocks() {
    for n in [10, 12] {
        let red = reduce_to_canonical_quadratic(n).unwrap();
        let mut lead = Rational::zero();
        for t in &red.terms {
            match t.block {
                Block::Leading => lead += &t.coefficient,
                b => {
                    let x = t.alpha.0;
                    let want = displayed_block(b, x, n).unwrap().unwrap();
                    assert_eq!(t.coefficient, want, "n={n} {b:?} x={x}");
                }
            }
        }
        assert_eq!(lead, displayed_block(Block::Leading, 0, n).unwrap().unwrap());
        assert_eq!(red.net, displayed_constant(n).unwrap());
    }
}

#[test]
fn quadratic_to_norm_by_divergence_search() {
    let n = 10;
    let q = LinComb::of(canonical_quadratic(n));
    let (x, cert) = find_divergence(&q, &[weyl_gradient_norm((n / 2 - 2) as usize)], n, SearchOpts::default()).unwrap();
    assert_eq!(x[0], quadratic_to_norm(n));
    assert!(cert.holds().unwrap());
}

#[test]
fn report_at_ten() {
    let r = verify_motlagh(10).unwrap();
    assert_eq!(r.net_constant, rat(1, 98));
    assert_eq!(r.laplacian.factors, vec![-6, -4, -2]);
    assert_eq!(r.sign, -1);
    assert!(r.nonzero);
    let j = serde_json::to_value(&r).unwrap();
    assert_eq!(j["net_constant"], "1/98");
}
