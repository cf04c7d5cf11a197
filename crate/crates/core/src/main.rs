fn main() {
    std::process::exit(icfdr::cli::main_with_args(std::env::args_os()));
}
