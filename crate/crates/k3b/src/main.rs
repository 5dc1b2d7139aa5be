fn main() {
    std::process::exit(k3b::cli::run());
}
