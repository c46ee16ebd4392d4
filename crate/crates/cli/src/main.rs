fn main() {
    std::process::exit(recyc_miso_cli::parse_and_dispatch(std::env::args().collect()));
}
