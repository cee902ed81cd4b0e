fn main() {
    std::process::exit(bimode_stirap::cli::main());
}
