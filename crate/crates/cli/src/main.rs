fn main() {
    std::process::exit(spchs_cli::run_command(std::env::args()));
}
