fn main() {
    std::process::exit(gridledger::cli::run(std::env::args_os()));
}
