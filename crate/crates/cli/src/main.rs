fn main() {
    std::process::exit(dehaze_cli::run_cli(std::env::args_os()));
}
