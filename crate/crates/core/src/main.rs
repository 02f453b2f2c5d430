fn main() {
    std::process::exit(qmc_greeks::cli::main());
}
