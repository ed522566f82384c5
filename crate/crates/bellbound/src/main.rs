use std::io::Write;
use std::process::ExitCode;

use bellbound::cli::Cli;
use bellbound::run::execute;
use bellbound::CliError;
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.into_config().and_then(|cfg| {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        execute(&cfg, &mut out)?;
        out.flush()?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not an error.
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
