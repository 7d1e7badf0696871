fn main() {
    std::process::exit(eil_cli::run(std::env::args_os()));
}
