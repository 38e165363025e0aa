fn main() {
    std::process::exit(waveshape::cli::run(std::env::args_os()));
}
