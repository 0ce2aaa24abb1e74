use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use levy2_cli::commands::{self, Cli};
use levy2_cli::report::EXIT_USAGE;

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("LEVY_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("LEVY_THREADS must be a positive integer, got {s:?}")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match thread_count(cli.threads) {
        Ok(Some(0)) | Err(_) => {
            eprintln!("error: thread count must be a positive integer");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
        Ok(None) => {}
    }

    match commands::run(&cli.command) {
        Ok(report) => {
            // a closed pipe on stdout is not an error of the run
            let _ = writeln!(std::io::stdout().lock(), "{}", report.to_json());
            eprintln!(
                "{}: {:?}, value {} +/- {} ({:.2}s)",
                report.command,
                report.status,
                report.value.map_or("n/a".into(), |v| format!("{v:.15}")),
                report.error.map_or("n/a".into(), |v| format!("{v:.3e}")),
                report.wall_time_s
            );
            if report.command == "verify" {
                if let Some(checks) = report.results.get("checks").and_then(|c| c.as_array()) {
                    for c in checks {
                        if let Ok(c) = serde_json::from_value::<levy2_cli::checks::CheckOutcome>(c.clone()) {
                            eprintln!("  {}", c.line());
                        }
                    }
                }
            }
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
