fn main() {
    std::process::exit(wulfflab::cli::run(std::env::args_os()));
}
