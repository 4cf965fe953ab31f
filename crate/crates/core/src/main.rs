fn main() {
    std::process::exit(phaseless::cli::main_with_args(std::env::args_os()));
}
