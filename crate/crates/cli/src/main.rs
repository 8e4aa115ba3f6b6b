fn main() {
    std::process::exit(lamplighter_cli::main_with_args(std::env::args_os()));
}
