//! Dimension-dependent coefficients: rational functions of `n` and range
//! products.

use tensorcalc::ratcoef::{int, parse_coef, Affine, DimPoly, DimRatio, ProdRatio, RangeProduct};

fn main() {
    let c = DimRatio::new(DimPoly::n_minus(3), DimPoly::affine(2, -4)).unwrap();
    println!("c(n) = {c}");
    for n in [6, 10, 14] {
        println!("  c({n}) = {}", c.eval_at(n).unwrap());
    }
    println!("positive for n >= 6: {:?}", c.positive_for_all_n_geq(6));

    // 4 / ((n-3)(n-4)(n-6)...4) written as a range product
    let tail = RangeProduct::new(Affine::new(1, -4), Affine::constant(4), 2).unwrap();
    let k = ProdRatio::from_ratio(&DimRatio::new(DimPoly::from_ints(&[4]), DimPoly::n_minus(3)).unwrap())
        .mul(&ProdRatio::over_range(int(1), tail));
    for n in [10, 12, 14] {
        println!("  4/K at n={n}: {}", k.eval_at(n).unwrap());
    }

    let parsed = parse_coef("(n-3)/(2*(n-2))", None).unwrap().into_ratio().unwrap();
    println!("parsed: {parsed}");
}
