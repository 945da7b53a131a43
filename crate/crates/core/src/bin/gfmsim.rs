fn main() {
    std::process::exit(gfmsim::cli::main_with_args(std::env::args_os()));
}
