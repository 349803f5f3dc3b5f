//! Strip derivatives off a scalar function and decompose the Weyl
//! divergences that appear.

use tensorcalc::divergence::{sil_family, silly_decomposed_coefficient, silly_multiplicity};
use tensorcalc::textio::print_contraction;

fn main() {
    for g in 0..4 {
        println!("gamma1 = {g}: {}", print_contraction(&sil_family(g, 0, 0, 4)));
        println!("  sharp member multiplicity {}", silly_multiplicity(g, 0, 0, 4).unwrap());
    }
    for g in 0..3 {
        println!(
            "gamma1 = {g}: one factor {}, both factors {}",
            silly_decomposed_coefficient(g, false).unwrap(),
            silly_decomposed_coefficient(g, true).unwrap()
        );
    }
}
