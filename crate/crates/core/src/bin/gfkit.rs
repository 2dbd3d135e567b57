fn main() {
    std::process::exit(gfkit::cli::main_with_args(std::env::args_os()));
}
