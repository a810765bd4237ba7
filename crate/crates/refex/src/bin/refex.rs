fn main() {
    std::process::exit(refex::cli::run(std::env::args()));
}
