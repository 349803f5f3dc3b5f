//! Evaluate contractions on seeded metric jets.

use tensorcalc::divergence::{canonical_quadratic, crossed_square, weyl_gradient_norm};
use tensorcalc::expr::LinComb;
use tensorcalc::numeval::{graded_coefficient, jets};
use tensorcalc::ratcoef::{rat, DimRatio};

fn main() {
    let n = 8;
    let mut lc = LinComb::of(crossed_square(n));
    lc.push(DimRatio::from_rational(rat(-1, 2)), weyl_gradient_norm(2));
    lc.push(DimRatio::from_rational(rat(1, n - 3)), canonical_quadratic(n));
    for (i, jet) in jets(n as usize, n as usize, 0, 5).iter().enumerate() {
        println!("jet {i}: t^2 coefficient {}", graded_coefficient(&lc, jet, 2).unwrap());
    }
}
