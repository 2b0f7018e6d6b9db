fn main() {
    std::process::exit(gibbslab::cli::run(std::env::args_os()));
}
