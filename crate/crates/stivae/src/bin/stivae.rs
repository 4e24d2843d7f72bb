fn main() {
    std::process::exit(stivae::cli::run());
}
