fn main() {
    std::process::exit(ttswe::cli::run_cli(std::env::args_os()));
}
