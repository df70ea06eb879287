fn main() {
    std::process::exit(twodesign::cli::main_with_args(std::env::args_os()));
}
