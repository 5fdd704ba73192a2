fn main() {
    std::process::exit(longres::cli::run(std::env::args_os()));
}
