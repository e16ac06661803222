fn main() {
    env_logger::init();
    std::process::exit(dfheat::cli::run(std::env::args_os()));
}
