fn main() {
    std::process::exit(gne_cli::run_cli(std::env::args()));
}
