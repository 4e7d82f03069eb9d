fn main() {
    std::process::exit(sbvp::cli::run_command(std::env::args()));
}
