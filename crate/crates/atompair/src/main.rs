fn main() {
    std::process::exit(atompair::cli::run());
}
