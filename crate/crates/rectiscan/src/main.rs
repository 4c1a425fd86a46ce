fn main() {
    std::process::exit(rectiscan::cli::main_with_args(std::env::args_os()));
}
