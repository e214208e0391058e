fn main() {
    std::process::exit(singlecopy::cli::main_with_args(std::env::args_os()));
}
