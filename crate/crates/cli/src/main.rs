use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("DMC_LOG", "warn")).init();
    std::process::exit(dmc_cli::run(std::env::args_os()));
}
