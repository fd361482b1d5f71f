fn main() {
    std::process::exit(ghype::cli::run());
}
