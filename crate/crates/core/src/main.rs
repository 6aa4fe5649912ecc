fn main() {
    std::process::exit(wassmean::cli::run(std::env::args_os()));
}
