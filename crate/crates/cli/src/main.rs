fn main() {
    std::process::exit(liftc::cli::run_cli(std::env::args_os()));
}
