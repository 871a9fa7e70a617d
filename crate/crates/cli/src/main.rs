use std::process::ExitCode;

use clap::Parser;
use gtzw_cli::config::RunConfig;
use gtzw_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GTZW_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = RunConfig::load(cli.flags.config.as_deref(), &cli.flags.overrides()).and_then(|cfg| {
        log::info!("config hash {}", cfg.hash());
        run(cli.command, &cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gtzw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
