fn main() {
    std::process::exit(bodykit::cli::run());
}
