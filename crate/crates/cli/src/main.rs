use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use bellplan_cli::{run, Cli, EXIT_FAILURE, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };

    if let Some(threads) = cli.threads {
        // A second initialization (e.g. in tests) is harmless; the first
        // pool wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match run(&cli) {
        Ok(output) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &output.text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_FAILURE as u8);
                }
            } else {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(output.text.as_bytes()).is_err() {
                    return ExitCode::from(EXIT_FAILURE as u8);
                }
            }
            ExitCode::from(output.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
