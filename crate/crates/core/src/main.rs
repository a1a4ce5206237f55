fn main() {
    std::process::exit(cascade_at::cli::run(std::env::args_os()));
}
