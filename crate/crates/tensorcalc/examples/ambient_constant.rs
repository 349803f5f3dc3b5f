//! The ambient Laplacian power of the curvature norm, reduced to a multiple
//! of the gradient norm of the Weyl tensor.

use tensorcalc::ambient::{verify_motlagh, y_row_braces};

fn main() {
    println!("row identity: {}", y_row_braces());
    for n in (10..=20).step_by(2) {
        let r = verify_motlagh(n).unwrap();
        println!(
            "n={n:2}: net {:>12}  leftover {:>10}  last row {:>12}  constant {}",
            r.net_constant.to_string(),
            r.leftover.to_string(),
            r.y_rows.last().map(|y| y.sum.to_string()).unwrap_or_default(),
            r.constant
        );
    }
}
