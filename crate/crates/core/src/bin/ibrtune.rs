fn main() {
    std::process::exit(ibr_tune::cli::run(std::env::args_os()));
}
