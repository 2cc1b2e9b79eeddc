fn main() {
    std::process::exit(cellsim::cli::main_with_args(std::env::args_os()));
}
