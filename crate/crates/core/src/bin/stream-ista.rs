fn main() {
    std::process::exit(streamista::harness::cli::cli_main(std::env::args_os()));
}
