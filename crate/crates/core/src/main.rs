fn main() {
    std::process::exit(splineproj::cli::main_with_args(std::env::args_os()));
}
