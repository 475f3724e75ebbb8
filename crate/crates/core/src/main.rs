fn main() {
    std::process::exit(setcp::cli::main_with_args(std::env::args_os()));
}
