fn main() {
    std::process::exit(nlse_core::cli::main_with_args(std::env::args_os()));
}
