fn main() {
    std::process::exit(cpn::cli::main_with_args(std::env::args_os()));
}
