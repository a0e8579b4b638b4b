fn main() {
    std::process::exit(lrd::cli::run(std::env::args_os()));
}
