fn main() {
    std::process::exit(colred::cli::main_with_args(std::env::args_os()));
}
