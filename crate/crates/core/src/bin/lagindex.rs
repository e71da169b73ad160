fn main() {
    std::process::exit(lagindex::cli::main_with_args(std::env::args_os()));
}
