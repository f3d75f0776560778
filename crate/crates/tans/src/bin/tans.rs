fn main() {
    std::process::exit(tans::cli::main_with_args(std::env::args_os()));
}
