fn main() {
    std::process::exit(nnls_ist::cli::run());
}
