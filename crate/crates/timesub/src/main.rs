use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(timesub::cli::run(std::env::args_os()))
}
