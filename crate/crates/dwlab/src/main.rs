fn main() {
    std::process::exit(dwlab::cli::run());
}
