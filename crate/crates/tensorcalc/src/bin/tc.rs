fn main() {
    std::process::exit(tensorcalc::cli::main_with_args(std::env::args_os()));
}
