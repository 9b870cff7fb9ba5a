use std::process::ExitCode;

use ncmetro::cli_io::{emit, parse_config, run, ParseOutcome};

fn main() -> ExitCode {
    let cfg = match parse_config(std::env::args()) {
        Ok(cfg) => cfg,
        Err(ParseOutcome::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(ParseOutcome::Error(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = run(&cfg).and_then(|env| {
        for flag in &env.trust_flags {
            eprintln!("warning: {flag}");
        }
        emit(&env, cfg.output_format(), cfg.output.as_deref())?;
        Ok(env.trusted)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        // results are written, but a numerical check was flagged
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
