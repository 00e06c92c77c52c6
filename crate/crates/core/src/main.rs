fn main() {
    std::process::exit(evolve::cli::main());
}
