fn main() {
    std::process::exit(memsvib::experiments::cli::run(std::env::args_os()));
}
