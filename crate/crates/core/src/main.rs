fn main() {
    std::process::exit(hairy_cantor::cli::run(std::env::args_os()));
}
