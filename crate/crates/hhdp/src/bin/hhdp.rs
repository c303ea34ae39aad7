fn main() {
    std::process::exit(hhdp::cli::cli_dispatch(std::env::args_os()));
}
