use clap::Parser;
use occlusim_cli::{dispatch, Cli, EXIT_INPUT};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OCCLUSIM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(dispatch(&cli));
}
