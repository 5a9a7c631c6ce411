fn main() {
    std::process::exit(dyadic_core::cli::main_with_args(std::env::args_os()));
}
