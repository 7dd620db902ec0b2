fn main() {
    std::process::exit(fiar_cli::run(std::env::args_os()));
}
