use std::process::ExitCode;

fn main() -> ExitCode {
    morphfit::cli::run(std::env::args_os())
}
