fn main() {
    std::process::exit(tailratio_cli::main_with_args(std::env::args_os()));
}
