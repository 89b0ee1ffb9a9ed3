fn main() {
    std::process::exit(qrecur::cli::main_with_args(std::env::args_os()));
}
