fn main() {
    std::process::exit(floiation::cli::run(std::env::args_os()));
}
