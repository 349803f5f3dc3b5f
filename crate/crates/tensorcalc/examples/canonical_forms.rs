//! Parse contractions, compare canonical forms, and read off statistics.

use tensorcalc::expr::canonicalize;
use tensorcalc::textio::{parse, print_contraction};

fn main() {
    let forms = [
        "contr(W[a,b,c,d] * W[a,b,c,d])",
        "contr(W[b,a,d,c] * W[a,b,c,d])",
        "contr(W[b,a,c,d] * W[a,b,c,d])",
        "contr(W[a,b,c,d] * W[a,c,b,d])",
        "contr(W[a,a,c,d] * W[b,b,c,d])",
    ];
    for f in forms {
        let lc = parse(f).unwrap();
        let c = &lc.terms[0].1;
        let (sign, canon) = canonicalize(c);
        let s = c.stats();
        println!("{f:40} -> sign {sign:>2}  {}  (sigma {}, delta {})", print_contraction(&canon), s.sigma, s.delta);
    }
}
