fn main() {
    std::process::exit(ionsynth::cli::run_from_args(std::env::args_os()));
}
