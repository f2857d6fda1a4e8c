fn main() {
    std::process::exit(skyfleet::experiments::cli::run(std::env::args_os()));
}
