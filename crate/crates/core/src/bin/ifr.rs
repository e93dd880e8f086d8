fn main() {
    std::process::exit(ifr::report::run_cli(std::env::args_os()));
}
