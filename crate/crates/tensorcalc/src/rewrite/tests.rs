use num::Zero;

use super::*;
use crate::expr::equal_mod_symmetry;
use crate::expr::linalg::solve_leading;
use crate::expr::linearize::vanishes_at_leading_length;
use crate::numeval::{evaluate_lc, evaluate_to, graded_coefficient, jets, make_random_jet};
use crate::textio::parse;

fn one_term(s: &str) -> Contraction {
    let lc = parse(s).unwrap();
    assert_eq!(lc.len(), 1, "{s}");
    lc.terms[0].1.clone()
}

/// `lhs == rhs` through `t^dmax` on raw, ordered terms at n = 6.
fn assert_exact(lhs: &Contraction, rhs: &LinComb, order: usize, dmax: usize) {
    for seed in 0..2 {
        let j = make_random_jet(6, order, 100 + seed);
        let a = evaluate_to(lhs, &j, dmax).unwrap();
        let b = evaluate_lc(rhs, &j, dmax).unwrap();
        assert!(!a.is_zero(), "degenerate check");
        assert_eq!(a, b, "seed {seed}");
    }
}

#[test]
fn manifest_matches_implementation() {
    let rules = manifest();
    assert!(rules.len() >= RULE_NAMES.len());
    for r in rules {
        let c = one_term(&r.pattern);
        let got = apply_rule(&r.name, &c, 0, &r.args, Mode::Track).unwrap();
        let want = parse(&r.template).unwrap();
        assert!(equal_mod_symmetry(&got.total(), &want), "{}: {}", r.name, crate::textio::print_collected(&got.total()));
        if !r.exact {
            assert!(vanishes_at_leading_length(&got.total().sub(&LinComb::of(c))).unwrap());
        }
    }
    for name in RULE_NAMES {
        assert!(manifest().iter().any(|r| r.name == *name), "{name} missing from manifest");
    }
}

#[test]
fn weyl_decomposition_is_exact() {
    let c = one_term("contr(D[e] W[a,b,c,d] D[e,a] Rm[b,c,d,f] D[f] psi1)");
    assert_exact(&c, &weyl_decompose(&c, 0).unwrap().main, 4, 4);
}

#[test]
fn schouten_ricci_round_trip_is_exact() {
    let c = one_term("contr(D[c] P[a,b] D[c,a] Ric[b,d] D[d] psi1)");
    assert_exact(&c, &schouten_to_ricci(&c, 0).unwrap().main, 4, 4);
    let r = one_term("contr(D[c] Ric[a,b] D[c,a,b] psi1)");
    assert_exact(&r, &ricci_to_schouten(&r, 0).unwrap().main, 4, 4);
}

#[test]
fn cotton_identity_is_exact() {
    for (s, slot) in [
        ("contr(D[c] P[a,b] D[a] Rm[b,e,c,f] D[e,f] psi1)", 0),
        ("contr(D[c] P[a,b] D[a] Rm[b,e,c,f] D[e,f] psi1)", 1),
        ("contr(D[r,c] P[a,b] D[r,a] Ric[b,c])", 0),
    ] {
        let c = one_term(s);
        assert_exact(&c, &cotton_identity(&c, 0, slot).unwrap().main, 4, 4);
    }
    let bare = one_term("contr(P[a,b] Ric[a,b])");
    assert!(matches!(cotton_identity(&bare, 0, 0), Err(RewriteError::NotApplicable { .. })));
}

#[test]
fn cotton_on_symmetrized_pair_vanishes() {
    // c contracted with a: the swap is the same term and the Weyl part is a trace
    let c = one_term("contr(D[a] P[a,b] D[b] psi1)");
    let r = cotton_identity(&c, 0, 0).unwrap();
    assert!(equal_mod_symmetry(&r.main, &LinComb::of(c)));
}

#[test]
fn contracted_bianchi_is_exact() {
    for s in ["contr(D[c] P[x,x] D[c] psi1)", "contr(D[e,a] P[a,c] D[e,c] psi1)", "contr(D[e,c] P[x,x] Ric[e,c])"] {
        let c = one_term(s);
        assert_exact(&c, &contracted_bianchi(&c, 0).unwrap().main, 4, 4);
    }
    let c = one_term("contr(D[e] P[a,c] Ric[a,c] D[e] psi1)");
    assert!(contracted_bianchi(&c, 0).is_err());
}

#[test]
fn commutation_is_exact_when_tracked() {
    for (s, i, j) in [
        ("contr(D[c,d] Ric[a,b] D[c] Rm[a,d,b,e] D[e] psi1)", 0, 1),
        ("contr(D[a,b,c] psi1 D[a,b] Ric[c,e] D[e] psi2)", 0, 2),
        ("contr(D[r,c,d] P[a,b] D[r,a] Rm[b,c,d,e] D[e] psi1)", 1, 2),
    ] {
        let c = one_term(s);
        let r = commute_derivatives(&c, 0, i, j, Mode::Track).unwrap();
        assert!(!r.corrections.is_empty());
        assert_exact(&c, &r.total(), 5, 5);
    }
}

#[test]
fn commutation_discard_mode_truncates() {
    let c = one_term("contr(D[c,d] Ric[a,b] D[c] Rm[a,d,b,e] D[e] psi1)");
    let r = commute_derivatives(&c, 0, 0, 1, Mode::Discard).unwrap();
    assert!(r.corrections.is_empty());
    assert!(r.truncated > 0);
    for j in jets(6, 4, 3, 2) {
        let diff = LinComb::of(c.clone()).sub(&r.main);
        assert!(graded_coefficient(&diff, &j, 3).unwrap().is_zero());
    }
    // contracted pair: the commutator vanishes identically
    let c = one_term("contr(D[c,c] Ric[a,b] Ric[a,b])");
    let r = commute_derivatives(&c, 0, 0, 1, Mode::Track).unwrap();
    assert!(r.corrections.collect().is_empty());
}

#[test]
fn fake_second_bianchi_is_exact() {
    for s in [
        "contr(D[e] W[a,b,c,d] D[e,a] Rm[b,c,d,f] D[f] psi1)",
        "contr(D[r,e] W[a,b,c,d] D[r,a] Rm[e,c,b,d])",
    ] {
        let c = one_term(s);
        assert_exact(&c, &fake_second_bianchi(&c, 0).unwrap().main, 4, 4);
    }
}

#[test]
fn weyl_divergence_constants_from_linear_solve() {
    let target = parse("contr(D[i,l] W[i,j,k,l])").unwrap();
    let basis: Vec<Contraction> = ["contr(D[i,l] Rm[i,j,k,l])", "contr(D[j,k] R)", "contr(D[s,s] R g[j,k])"]
        .iter()
        .map(|s| one_term(s))
        .collect();
    let x = solve_leading(&target, &basis).unwrap();
    let (c1, c2) = weyl_divergence_constants();
    assert_eq!(x, vec![weyl_divergence_rm_coef(), c1, c2]);
}

#[test]
fn weyl_double_divergence_numerically() {
    let c = one_term("contr(D[i,l] W[i,j,k,l] D[j,k] psi1)");
    let r = weyl_double_divergence(&c, 0).unwrap();
    let diff = LinComb::of(c.clone()).sub(&r.main);
    for j in jets(8, 4, 40, 3) {
        assert!(graded_coefficient(&diff, &j, 2).unwrap().is_zero());
    }
    // orientation via the pair symmetries
    let c2 = one_term("contr(D[i,l] W[j,i,l,k] D[j,k] psi1)");
    let r2 = weyl_double_divergence(&c2, 0).unwrap();
    assert!(equal_mod_symmetry(&r2.main, &r.main));
}

#[test]
fn weyl_norm_decomposes_exactly() {
    let lc = parse(
        "contr(W[a,b,c,d] W[a,b,c,d]) - contr(Rm[a,b,c,d] Rm[a,b,c,d]) \
         + 4/(n-2) contr(Ric[a,b] Ric[a,b]) - 2/((n-1)(n-2)) contr(R R)",
    )
    .unwrap();
    let out = normalize(&lc, &RuleSet::default(), &GradePolicy::track(2)).unwrap();
    assert!(out.lc.is_empty(), "{}", crate::textio::print(&out.lc));
}

#[test]
fn first_bianchi_halves_the_crossed_square() {
    let lc = parse("contr(Rm[a,b,c,d] Rm[a,c,b,d]) - 1/2 contr(Rm[a,b,c,d] Rm[a,b,c,d])").unwrap();
    let out = normalize(&lc, &RuleSet::default(), &GradePolicy::track(2)).unwrap();
    assert!(out.lc.is_empty(), "{}", crate::textio::print(&out.lc));
}

#[test]
fn normalize_is_idempotent() {
    let lc = parse("contr(D[a] W[a,b,c,d] D[e] W[e,b,c,d]) + contr(D[e,a] P[a,b] D[e] Ric[b,c] D[c] psi1) + contr(R R R)").unwrap();
    for policy in [GradePolicy::track(3), GradePolicy::discard(2)] {
        let once = normalize(&lc, &RuleSet::default(), &policy).unwrap();
        let twice = normalize(&once.lc, &RuleSet::default(), &policy).unwrap();
        assert_eq!(once.lc, twice.lc);
        if policy.mode == Mode::Discard {
            assert!(once.truncated > 0);
        }
    }
}

#[test]
fn iteration_cap_reports_trace() {
    let lc = parse("contr(W[a,b,c,d] W[a,b,c,d])").unwrap();
    let rules = RuleSet {
        max_steps: 3,
        ..RuleSet::default()
    };
    match normalize(&lc, &rules, &GradePolicy::track(2)) {
        Err(RewriteError::IterationCap { trace, .. }) => assert!(!trace.is_empty()),
        other => panic!("expected a cap error, got {other:?}"),
    }
}

#[test]
fn leading_identities_reduce_to_zero() {
    // D^a D^b Ric_ab = Delta R / 2 modulo longer terms
    let lc = parse("contr(D[a,b] Ric[a,b]) - 1/2 contr(D[a,a] R)").unwrap();
    let out = normalize(&lc, &RuleSet::default(), &GradePolicy::discard(1)).unwrap();
    assert!(out.lc.is_empty());
}
