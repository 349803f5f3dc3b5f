use super::*;
use crate::numeval::{evaluate_lc, graded_coefficient, jets, make_random_jet};
use crate::ratcoef::Rational;
use crate::textio::parse;

fn one(s: &str) -> Contraction {
    parse(s).unwrap().terms[0].1.clone()
}

#[test]
fn erase_slot_rebuilds_the_term() {
    let c = one("contr(D[a] Ric[a,b] D[b] R)");
    let (v, freed, others) = erase_slot(&c, SlotId::new(0, 0)).unwrap();
    assert_eq!(freed, SlotId::new(0, 1));
    assert_eq!(v.num_free(), 1);
    assert_eq!(others.len(), 1);
    let div = v.free_index_divergence().unwrap();
    let back = div.sub(&LinComb::of(others[0].clone())).collect();
    assert_eq!(back, LinComb::of(c).collect());
}

#[test]
fn elimination_certificate_is_exact() {
    let c = one("contr(D[a,b,c] Rm[a,d,b,e] D[c] Ric[d,e])");
    let cert = eliminate_internal_contractions(&c, &GradePolicy::track(10)).unwrap();
    assert!(!cert.steps.is_empty());
    for (_, t) in &cert.remainder.terms {
        assert!(t.internal_edges().is_empty());
    }
    // input - div - remainder = corrections, numerically on raw orderings
    let lhs = cert.defect().unwrap().sub(&cert.corrections);
    for seed in [7, 8] {
        let jet = make_random_jet(6, 6, seed);
        assert!(evaluate_lc(&lhs, &jet, 5).unwrap().is_zero());
    }
}

#[test]
fn elimination_reduces_internal_count_each_step() {
    let c = one("contr(D[a,a,b] psi1 D[b,c,c] psi2)");
    let cert = eliminate_internal_contractions(&c, &GradePolicy::track(4)).unwrap();
    for s in &cert.steps {
        let before = s.source.internal_edges().len();
        let v = &s.vector_field;
        // erasing removes exactly one internal pair
        assert_eq!(v.internal_edges().len() + 1, before);
    }
    let lhs = cert.defect().unwrap().sub(&cert.corrections);
    let jet = make_random_jet(6, 6, 12);
    assert!(evaluate_lc(&lhs, &jet, 5).unwrap().is_zero());
}

#[test]
fn trace_only_internal_pair_is_stuck_or_resolved() {
    // Ricci traces resolve first, leaving no internal contraction
    let c = one("contr(Rm[a,b,a,b])");
    let cert = eliminate_internal_contractions(&c, &GradePolicy::track(1)).unwrap();
    assert!(cert.steps.is_empty());
    assert_eq!(cert.remainder.len(), 1);
}

#[test]
fn erase_and_free_picks_derivative_endpoint() {
    let c = one("contr(D[a] Ric[a,b] D[b] R)");
    let st = erase_and_free(&c, (SlotId::new(0, 1), SlotId::new(0, 0))).unwrap();
    assert_eq!(st.erased, SlotId::new(0, 0));
    let bad = one("contr(Rm[a,b,c,d] Rm[a,b,c,d])");
    assert!(erase_and_free(&bad, (SlotId::new(0, 0), SlotId::new(1, 0))).is_err());
}

#[test]
fn quadratic_shapes_reduce_with_expected_multiples() {
    for n in [10i64] {
        for shape in QuadShape::all(n) {
            let c = quadratic_shape(shape, n);
            assert_eq!(std::mem::discriminant(&classify_quadratic(&c, n).unwrap().0), std::mem::discriminant(&shape));
            let (x, cert) = reduce_quadratic_weyl(&c, n).unwrap();
            assert_eq!(x, shape.expected_multiple(n), "{shape:?} at n={n}");
            assert!(cert.holds().unwrap());
            // independent numeric oracle at leading length
            let defect = cert.defect().unwrap();
            let sigma = 2;
            for jet in jets(n as usize, n as usize - 2, 900, 2) {
                assert_eq!(graded_coefficient(&defect, &jet, sigma).unwrap(), Rational::from_integer(0.into()));
            }
        }
    }
}

#[test]
fn silly_transform_is_exact() {
    let lc = parse("contr(D[a,a,b] psi1 D[b] W[c,d,e,f] D[c] W[f,e,d,g] D[g] psi2)").unwrap();
    let cert = silly_certificate(&lc, 1).unwrap();
    for (_, t) in &cert.remainder.terms {
        assert_eq!(t.factors()[t.positions(crate::expr::FactorKind::ScalarFn(1))[0]].m, 0);
    }
    assert!(cert.holds().unwrap());
    let d = cert.defect().unwrap();
    let jet = make_random_jet(6, 6, 41);
    assert!(evaluate_lc(&d, &jet, 5).unwrap().is_zero());
    assert!(silly_integrate_by_parts(&parse("contr(W[a,b,c,d] W[a,b,c,d])").unwrap(), 1).is_err());
}

#[test]
fn certificate_json_has_sorted_keys() {
    let c = one("contr(D[a] Ric[a,b] D[b] R)");
    let cert = eliminate_internal_contractions(&c, &GradePolicy::track(3)).unwrap();
    let s = serde_json::to_string(&cert.to_json()).unwrap();
    assert!(s.starts_with("{\"corrections\""));
}

#[test]
fn crossed_cube_is_half_crossed_square_mod_divergence() {
    let n = 10;
    let (x, cert) = find_divergence(&LinComb::of(crossed_cube(n)), &[crossed_square(n)], n, SearchOpts::default()).unwrap();
    assert_eq!(x, vec![crate::ratcoef::rat(1, 2)]);
    assert!(cert.holds().unwrap());
    let d = cert.defect().unwrap();
    for jet in jets(10, 8, 77, 2) {
        assert_eq!(graded_coefficient(&d, &jet, 2).unwrap(), Rational::from_integer(0.into()));
    }
}

#[test]
fn barred_cube_normalizes_to_half_primed() {
    use crate::rewrite::{normalize, RuleSet};
    for n in [10, 12] {
        let mut lc = LinComb::of(barred_cube(n));
        lc.push(DimRatio::from_rational(crate::ratcoef::rat(-1, 2)), primed_cube(n));
        let out = normalize(&lc, &RuleSet::default(), &GradePolicy::discard(2)).unwrap();
        assert!(out.lc.collect().is_empty(), "n={n}");
    }
}

#[test]
fn silly_multiplicity_on_sharp_member() {
    for g in 0..3 {
        let m = silly_multiplicity(g, 0, 0, 4).unwrap();
        assert_eq!(m, DimRatio::from_int(1 << (g + 1)));
        let cert = silly_certificate(&LinComb::of(sil_family(g, 0, 0, 4)), 1).unwrap();
        assert!(cert.holds().unwrap());
    }
    let one = silly_decomposed_coefficient(1, false).unwrap();
    assert_eq!(one, &DimRatio::from_int(4) * &crate::rewrite::weyl_divergence_rm_coef());
}

#[test]
fn laplacian_power_of_scalar_curvature_is_a_divergence() {
    for n in [6usize, 8, 10] {
        let k = n / 2 - 1;
        let mut lap = String::new();
        for i in 0..k {
            let l = (b'a' + i as u8) as char;
            lap.push_str(&format!("{l},{l},"));
        }
        lap.pop();
        let c = one(&format!("contr(D[{lap}] R)"));
        let cert = eliminate_internal_contractions(&c, &GradePolicy::track(1)).unwrap();
        assert!(cert.remainder.collect().is_empty());
        assert!(cert.corrections.collect().is_empty());
        assert_eq!(cert.truncated, 0);
        assert!(cert.holds().unwrap());
    }
}
