fn main() {
    env_logger::init();
    std::process::exit(extbandit::cli::run(std::env::args_os()));
}
