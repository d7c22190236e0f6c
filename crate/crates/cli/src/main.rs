fn main() {
    std::process::exit(kgcoherent_cli::run(std::env::args_os()));
}
