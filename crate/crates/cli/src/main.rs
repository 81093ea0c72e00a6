use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = io::BufWriter::new(stdout.lock());
    let code = rabi_cf_cli::run(std::env::args_os().collect(), &mut out, &mut stderr.lock());
    if out.flush().is_err() {
        return ExitCode::from(rabi_cf_cli::EXIT_NUMERICAL as u8);
    }
    ExitCode::from(code as u8)
}
