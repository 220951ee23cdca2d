use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use csq_cli::config::{normalize_args, Args, TOL_ENV};
use csq_cli::execute;

fn first_line(s: &str) -> &str {
    s.lines().find(|l| !l.trim().is_empty()).unwrap_or(s)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let args = match Args::try_parse_from(normalize_args(std::env::args_os())) {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            eprintln!("{}", first_line(&e.to_string()));
            return ExitCode::from(2);
        }
    };
    let env_tol = std::env::var(TOL_ENV).ok();
    let cfg = match args.into_config(env_tol.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", first_line(&format!("{e:#}")));
            ExitCode::from(1)
        }
    }
}
