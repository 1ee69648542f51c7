fn main() {
    std::process::exit(optbin::cli::main_with_args(std::env::args_os()));
}
