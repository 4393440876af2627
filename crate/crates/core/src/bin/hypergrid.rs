fn main() {
    std::process::exit(hypergrid::cli::main());
}
