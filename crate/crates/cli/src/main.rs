fn main() {
    std::process::exit(evoquant::run_cli(std::env::args_os()));
}
