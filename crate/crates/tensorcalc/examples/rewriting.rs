//! Apply single rules and normalize a combination.

use tensorcalc::expr::LinComb;
use tensorcalc::rewrite::{normalize, weyl_decompose, GradePolicy, RuleSet};
use tensorcalc::textio::{parse, parse_with_n, print};

fn main() {
    let c = parse("contr(W[a,b,c,d] * Ric[a,c] * Ric[b,d])").unwrap().terms[0].1.clone();
    let r = weyl_decompose(&c, 0).unwrap();
    println!("decomposed: {}", print(&r.main));

    let n = 10;
    let lc = parse_with_n(
        "contr(D^[n/2-4][r] D[a,l] W[i,j,k,l] * D^[n/2-4][r] D[i,s] W[a,j,k,s])
         - 1/2 contr(D^[n/2-3][r] D[s] W[i,j,k,s] * D^[n/2-3][r] D[t] W[i,j,k,t])",
        Some(n),
    )
    .unwrap();
    let out = normalize(&lc.at_n(n).unwrap(), &RuleSet::default(), &GradePolicy::discard(2)).unwrap();
    let rest: LinComb = out.lc.collect();
    println!("barred cube - half primed cube at n={n}: {}", print(&rest));
}
