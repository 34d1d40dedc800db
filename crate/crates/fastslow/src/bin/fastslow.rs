fn main() {
    std::process::exit(fastslow::cli::main_entry(std::env::args()));
}
