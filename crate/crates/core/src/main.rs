fn main() {
    std::process::exit(oplab::cli::cli_main(std::env::args()));
}
