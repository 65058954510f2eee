fn main() {
    std::process::exit(regsched::cli::main_with_args(std::env::args_os()));
}
