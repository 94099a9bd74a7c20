fn main() {
    std::process::exit(polsent_cli::run(std::env::args_os()));
}
