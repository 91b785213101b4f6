fn main() {
    std::process::exit(slh_core::cli::run_cli(std::env::args_os()));
}
