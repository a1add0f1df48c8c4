fn main() {
    std::process::exit(qaoa_lab::cli::run(std::env::args_os()));
}
