fn main() {
    std::process::exit(heavyqf_cli::run(std::env::args_os()));
}
