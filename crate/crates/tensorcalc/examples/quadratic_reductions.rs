//! Every quadratic Weyl shape reduced to the canonical quadratic.

use tensorcalc::divergence::{quadratic_shape, reduce_quadratic_weyl, QuadShape};

fn main() {
    let n: i64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    for s in QuadShape::all(n) {
        let (m, cert) = reduce_quadratic_weyl(&quadratic_shape(s, n), n).unwrap();
        println!("{s:?}: {m} (expected {}, {} steps)", s.expected_multiple(n), cert.steps.len());
    }
}
