fn main() {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    std::process::exit(regtan::cli::run_cli(std::env::args_os()));
}
