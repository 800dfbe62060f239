use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = anadif_cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(outcome.exit_code as u8)
}
