fn main() {
    std::process::exit(aspen::cli::run(std::env::args_os()));
}
