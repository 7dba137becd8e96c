use std::io::{self, Write};
use std::process::ExitCode;

use aspdbg::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdin = io::stdin();
    let mut stdout = io::stdout();
    let mut stderr = io::stderr();
    let code = run(cli, stdin.lock(), &mut stdout, &mut stderr);
    let _ = stdout.flush();
    ExitCode::from(code)
}
