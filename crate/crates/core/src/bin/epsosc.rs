fn main() {
    std::process::exit(epsosc::cli::run_from(std::env::args_os()));
}
