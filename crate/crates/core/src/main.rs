fn main() {
    std::process::exit(sasoca::cli::run(std::env::args_os()));
}
