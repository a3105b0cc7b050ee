fn main() {
    std::process::exit(safegrid::harness::cli(std::env::args_os()));
}
