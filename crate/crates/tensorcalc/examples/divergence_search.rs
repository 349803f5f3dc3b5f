//! Integration by parts: exact elimination of internal contractions, and a
//! searched divergence relating two quadratic contractions.

use tensorcalc::divergence::{crossed_cube, crossed_square, eliminate_internal_contractions, find_divergence, SearchOpts};
use tensorcalc::expr::LinComb;
use tensorcalc::rewrite::GradePolicy;
use tensorcalc::textio::parse;

fn main() {
    let c = parse("contr(D[a,a,b,b,c,c] R)").unwrap().terms[0].1.clone();
    let cert = eliminate_internal_contractions(&c, &GradePolicy::track(1)).unwrap();
    println!("{}", serde_json::to_string_pretty(&cert.to_json()).unwrap());

    let n = 10;
    let (x, cert) = find_divergence(&LinComb::of(crossed_cube(n)), &[crossed_square(n)], n, SearchOpts::default()).unwrap();
    println!("crossed cube = {} * crossed square + divergence of {} fields (holds: {})", x[0], cert.steps.len(), cert.holds().unwrap());
}
