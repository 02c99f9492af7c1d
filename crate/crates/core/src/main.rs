use std::io::{IsTerminal, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let res = urysohn::shell::run(std::env::args_os());
    if res.exit_code == 2 {
        for line in &res.report {
            eprintln!("{line}");
        }
        return ExitCode::from(2);
    }
    // UMS_COLOR=0 turns off the colored status line
    let decorate =
        std::env::var("UMS_COLOR").as_deref() != Ok("0") && std::io::stdout().is_terminal();
    let mut out = std::io::stdout().lock();
    for (i, line) in res.report.iter().enumerate() {
        let _ = if i == 0 && decorate {
            let code = if res.exit_code == 0 { 32 } else { 31 };
            writeln!(out, "\x1b[1;{code}m{line}\x1b[0m")
        } else {
            writeln!(out, "{line}")
        };
    }
    ExitCode::from(res.exit_code as u8)
}
