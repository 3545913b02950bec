use std::process::ExitCode;

use clap::Parser;
use qflow::cli::{emit, exit_code, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.config.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("qflow: cannot set up {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = run(cli.command, &cli.config).and_then(|outcome| {
        emit(&cli.config, &outcome)?;
        Ok(outcome.failed)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qflow: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
