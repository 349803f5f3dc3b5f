//! Run a built-in verification suite from library code.

use tensorcalc::cli::{builtin_names, load_suite, run_suite};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sigma1".into());
    println!("available: {}", builtin_names().join(", "));
    let report = run_suite(&load_suite(&name).unwrap(), None);
    println!("{}", serde_json::to_string_pretty(&report.to_json()).unwrap());
}
