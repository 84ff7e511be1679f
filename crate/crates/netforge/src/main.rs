fn main() {
    std::process::exit(netforge::cli::run(std::env::args_os()));
}
