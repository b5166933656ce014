use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    if let Err(e) = cansys::cli::configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return ExitCode::from(cansys::cli::EXIT_FAIL as u8);
    }
    let code = cansys::cli::run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
