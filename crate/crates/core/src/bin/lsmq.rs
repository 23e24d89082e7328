fn main() {
    std::process::exit(lsm_quotient::cli::run(std::env::args_os()));
}
