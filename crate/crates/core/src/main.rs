fn main() {
    std::process::exit(singular_dde::cli::run());
}
