fn main() {
    std::process::exit(bisslb::cli::run(std::env::args_os()));
}
