use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("SVTPROX_LOG", "error")).init();
    std::process::exit(svtprox_cli::run(std::env::args_os()));
}
