fn main() {
    std::process::exit(toric_factor::cli::main_with_args(std::env::args_os()));
}
