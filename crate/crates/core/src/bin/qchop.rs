fn main() {
    std::process::exit(qchop::cli::main_with_args(std::env::args_os()));
}
