use std::io::Write;
use std::process::ExitCode;

use dlo::harness::{describe_run, parse_cli, run_experiment};

fn main() -> ExitCode {
    let config = match parse_cli(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                print!("{e}");
            } else {
                eprintln!("{e}");
            }
            return ExitCode::from(code as u8);
        }
    };
    let report = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    // a closed pipe (e.g. `| head`) must not turn a finished run into a crash
    let mut out = std::io::stdout().lock();
    for (seed, result) in &report.runs {
        let _ = writeln!(out, "{}", describe_run(*seed, result));
    }
    let _ = writeln!(out, "summary: {}", report.summary_path.display());
    if report.all_complete() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
