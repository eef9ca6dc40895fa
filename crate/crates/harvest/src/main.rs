fn main() {
    std::process::exit(noiseharvest::cli::run(std::env::args_os()));
}
