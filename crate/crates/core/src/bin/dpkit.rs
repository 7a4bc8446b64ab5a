fn main() {
    std::process::exit(dpkit::cli::run_from_args(std::env::args_os()));
}
