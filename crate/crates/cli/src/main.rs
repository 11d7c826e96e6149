fn main() {
    std::process::exit(annet_cli::main_with_args(std::env::args_os()));
}
