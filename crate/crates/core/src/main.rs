fn main() {
    std::process::exit(ssk_noma::cli::run(std::env::args_os()));
}
