fn main() {
    if let Err(e) = dirlab::cli::init_threads() {
        eprintln!("error: {e}");
        std::process::exit(dirlab::cli::EXIT_ERROR);
    }
    std::process::exit(dirlab::cli::run(std::env::args_os()));
}
