fn main() {
    std::process::exit(equinet::cli::cli_main(std::env::args_os()));
}
