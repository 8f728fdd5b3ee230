use std::process::ExitCode;

fn main() -> ExitCode {
    varlab::cli::run(std::env::args_os())
}
