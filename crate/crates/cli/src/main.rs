fn main() {
    std::process::exit(qoct_cli::run(std::env::args_os()));
}
